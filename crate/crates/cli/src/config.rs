//! TOML run configuration. Every key has a default; every key is checked
//! before any computation starts.

use std::path::Path;

use canonical_cluster::bounds;
use canonical_cluster::lattice::{Boundary, LatticeSpec, Potential};
use canonical_cluster::series;
use canonical_cluster::Error;
use num_rational::Ratio;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid {key}: {msg}")]
    Key { key: &'static str, msg: String },
}

fn bad(key: &'static str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Key { key, msg: msg.into() }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub radii: RadiiConfig,
    pub series: SeriesConfig,
    pub oracle: OracleConfig,
    pub correlate: CorrelateConfig,
    pub deviate: DeviateConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    /// "zero" or "periodic".
    pub boundary: String,
    /// "standard" or "kac".
    pub potential: String,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "R")]
    pub r: u32,
    pub beta: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { d: 1, l: 10, boundary: "periodic".into(), potential: "standard".into(), j: 1.0, r: 1, beta: 0.2 }
    }
}

impl ModelConfig {
    pub fn boundary(&self) -> Boundary {
        if self.boundary == "zero" {
            Boundary::Zero
        } else {
            Boundary::Periodic
        }
    }

    pub fn potential(&self) -> Result<Potential, Error> {
        self.potential_with(self.j)
    }

    /// The configured potential kind with coupling `j` (ignored for Kac).
    pub fn potential_with(&self, j: f64) -> Result<Potential, Error> {
        match self.potential.as_str() {
            "kac" => Potential::kac(self.r),
            _ => Potential::standard(j),
        }
    }

    pub fn lattice(&self) -> Result<LatticeSpec, Error> {
        let lat = LatticeSpec::new(self.d, self.l, self.boundary())?;
        self.potential()?.check_fits(&lat)?;
        Ok(lat)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=3).contains(&self.d) {
            return Err(bad("model.d", format!("must be 1, 2 or 3, got {}", self.d)));
        }
        if self.l < 2 {
            return Err(bad("model.L", format!("must be >= 2, got {}", self.l)));
        }
        if !matches!(self.boundary.as_str(), "zero" | "periodic") {
            return Err(bad("model.boundary", format!("must be \"zero\" or \"periodic\", got {:?}", self.boundary)));
        }
        if !matches!(self.potential.as_str(), "standard" | "kac") {
            return Err(bad("model.potential", format!("must be \"standard\" or \"kac\", got {:?}", self.potential)));
        }
        if !(self.j > 0.0 && self.j.is_finite()) {
            return Err(bad("model.J", format!("must be a finite real > 0, got {}", self.j)));
        }
        if self.r < 1 {
            return Err(bad("model.R", "must be >= 1"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(bad("model.beta", format!("must be a finite real >= 0, got {}", self.beta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure {
    pub name: String,
    /// (d, J) pairs.
    pub pairs: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiiConfig {
    /// Explicit β grid; the 101-point grid on [0, 1] when absent.
    pub beta: Option<Vec<f64>>,
    pub figures: Vec<Figure>,
}

impl Default for RadiiConfig {
    fn default() -> Self {
        let f = |name: &str, pairs: &[(usize, f64)]| Figure { name: name.into(), pairs: pairs.to_vec() };
        RadiiConfig {
            beta: None,
            figures: vec![
                f("figure1_canonical_radii", &[(1, 1.0), (2, 1.0), (3, 1.0)]),
                f("figure2_thresholds_by_coupling", &[(1, 1.0), (1, 2.0)]),
                f("figure3_thresholds_by_dimension", &[(1, 1.0), (2, 1.0)]),
                f("figure4_virial_radius", &[(1, 1.0), (2, 1.0), (3, 1.0)]),
            ],
        }
    }
}

impl RadiiConfig {
    pub fn beta_grid(&self) -> Vec<f64> {
        self.beta.clone().unwrap_or_else(bounds::beta_grid)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let g = self.beta_grid();
        if g.is_empty() {
            return Err(bad("radii.beta", "grid must be nonempty"));
        }
        if let Some(b) = g.iter().find(|b| !(**b >= 0.0 && b.is_finite())) {
            return Err(bad("radii.beta", format!("entries must be finite reals >= 0, got {b}")));
        }
        if self.figures.is_empty() {
            return Err(bad("radii.figures", "need at least one figure"));
        }
        for f in &self.figures {
            if f.name.is_empty() || f.name.contains(['/', '\\']) {
                return Err(bad("radii.figures.name", format!("must be a plain file stem, got {:?}", f.name)));
            }
            if f.pairs.is_empty() {
                return Err(bad("radii.figures.pairs", format!("figure {:?} has no (d, J) pairs", f.name)));
            }
            for &(d, j) in &f.pairs {
                if !(1..=3).contains(&d) || !(j > 0.0 && j.is_finite()) {
                    return Err(bad("radii.figures.pairs", format!("need d in 1..=3 and J > 0, got ({d}, {j})")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeriesConfig {
    pub order: usize,
    /// Particle number for F_coeff; order + 1 when absent.
    #[serde(rename = "N")]
    pub n: Option<usize>,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { order: series::MAX_BETA_ORDER, n: None }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorrelateConfig {
    pub cases: Vec<CaseConfig>,
}

impl Default for CorrelateConfig {
    fn default() -> Self {
        CorrelateConfig { cases: vec![CaseConfig { l: 12, n: 2, beta: 0.2 }] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviateConfig {
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    /// M_LG − 1 when absent.
    pub mu0: Option<f64>,
    /// Exponents as "p/q" strings.
    pub alpha: Vec<String>,
    pub u: Vec<f64>,
}

impl Default for DeviateConfig {
    fn default() -> Self {
        DeviateConfig { l: vec![64, 128, 256], mu0: None, alpha: vec!["1/2".into()], u: vec![0.0, 0.5, 1.0] }
    }
}

impl DeviateConfig {
    pub fn alphas(&self) -> Result<Vec<Ratio<i64>>, ConfigError> {
        self.alpha
            .iter()
            .map(|s| {
                let r: Ratio<i64> = s.trim().parse().map_err(|_| bad("deviate.alpha", format!("expected a fraction like \"1/2\", got {s:?}")))?;
                if r < Ratio::new(1, 2) || r > Ratio::from_integer(1) {
                    return Err(bad("deviate.alpha", format!("must lie in [1/2, 1], got {s}")));
                }
                Ok(r)
            })
            .collect()
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.l.is_empty() || self.alpha.is_empty() || self.u.is_empty() {
            return Err(bad("deviate", "L, alpha and u must be nonempty"));
        }
        if let Some(&l) = self.l.iter().find(|&&l| l < 2) {
            return Err(bad("deviate.L", format!("entries must be >= 2, got {l}")));
        }
        if let Some(u) = self.u.iter().find(|u| !(**u >= 0.0 && u.is_finite())) {
            return Err(bad("deviate.u", format!("entries must be finite reals >= 0, got {u}")));
        }
        if let Some(m) = self.mu0 {
            if !m.is_finite() {
                return Err(bad("deviate.mu0", "must be finite"));
            }
        }
        self.alphas().map(|_| ())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Ok(toml::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate()?;
        self.radii.validate()?;
        if self.series.order == 0 {
            return Err(bad("series.order", "must be >= 1"));
        }
        if let Some(n) = self.series.n {
            if n == 0 {
                return Err(bad("series.N", "must be >= 1"));
            }
        }
        if let Some(mu) = self.oracle.mu {
            if !mu.is_finite() {
                return Err(bad("oracle.mu", "must be finite"));
            }
        }
        if self.correlate.cases.is_empty() {
            return Err(bad("correlate.cases", "need at least one case"));
        }
        for c in &self.correlate.cases {
            if c.l < 2 || c.n == 0 || c.n > c.l || !(c.beta >= 0.0 && c.beta.is_finite()) {
                return Err(bad("correlate.cases", format!("need L >= 2, 1 <= N <= L, β >= 0; got L={} N={} β={}", c.l, c.n, c.beta)));
            }
        }
        self.deviate.validate()
    }
}
