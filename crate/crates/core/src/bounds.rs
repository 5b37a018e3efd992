//! Closed-form convergence radii and chemical-potential thresholds.

use serde::{Deserialize, Serialize};

use crate::lattice::{model_constants, Potential};
use crate::{ln_binomial, Error, Result};

/// Upper end of the maximisation domain for 𝔉.
pub const A_MAX: f64 = 20.0;
const GRID_STEP: f64 = 1e-4;

/// g(a) = ln(1+w)/(e^a(1+w)), w = u(1 − e^{−a}).
pub fn g_of_a(a: f64, u: f64) -> f64 {
    let w = -u * (-a).exp_m1();
    w.ln_1p() / (a.exp() * (1.0 + w))
}

/// Lower end of the search: 1e−8, or lower when the peak a* ~ e/u sits below it.
pub fn a_min(u: f64) -> f64 {
    1e-8f64.min(1e-2 / u)
}

/// 𝔉(u) = max_{a>0} g(a): returns (a*, 𝔉(u)).
///
/// A 1e−4 grid in log a locates the peak (and would expose a second local
/// maximum); golden-section search then refines inside the bracketing cells.
pub fn maximize_f(u: f64) -> Result<(f64, f64)> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::invalid("u", "must be a positive finite real"));
    }
    let lo = a_min(u).ln();
    let hi = A_MAX.ln();
    let steps = ((hi - lo) / GRID_STEP).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    let val = |t: f64| g_of_a(t.exp(), u);
    // scan form of g: with x = 1 − e^{−a}, g = ln(1+ux)(1−x)/(1+ux); the geometric
    // walk in a drifts by ~1e−11 relative, irrelevant at scan resolution
    let scan = |a: f64| {
        let x = -(-a).exp_m1();
        let w = u * x;
        w.ln_1p() * (1.0 - x) / (1.0 + w)
    };
    let ratio = h.exp();
    let mut a = lo.exp();
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut prev = f64::NEG_INFINITY;
    let mut rising = true;
    let mut peaks = 0usize;
    for i in 0..=steps {
        let v = scan(a);
        a *= ratio;
        if v > best.1 {
            best = (i, v);
        }
        if rising && v < prev {
            peaks += 1;
            rising = false;
        } else if !rising && v > prev {
            rising = true;
        }
        prev = v;
    }
    debug_assert!(peaks <= 1, "g(a) is expected to be unimodal");
    // refine in log a around the global grid argmax
    let mut x0 = lo + best.0.saturating_sub(1) as f64 * h;
    let mut x3 = (lo + (best.0 + 1) as f64 * h).min(hi);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = x3 - r * (x3 - x0);
    let mut x2 = x0 + r * (x3 - x0);
    let (mut f1, mut f2) = (val(x1), val(x2));
    // |Δ log a| ≤ 1e−13 gives |Δa| ≤ 1e−13·a ≤ 1e−12 on a ≤ 20
    while x3 - x0 > 1e-13 {
        if f1 < f2 {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + r * (x3 - x0);
            f2 = val(x2);
        } else {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - r * (x3 - x0);
            f1 = val(x1);
        }
    }
    let t = 0.5 * (x0 + x3);
    let (a, v) = (t.exp(), val(t));
    let t_grid = lo + best.0 as f64 * h;
    let v_grid = val(t_grid);
    if v >= v_grid {
        Ok((a, v))
    } else {
        Ok((t_grid.exp(), v_grid))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be a finite real >= 0"));
    }
    Ok(())
}

/// R_C = 𝔉(e^{−βB}) / (e^{βB} C̄); also returns a*.
pub fn radius_canonical(d: usize, pot: &Potential, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let k = model_constants(d, pot, beta)?;
    let (a, f) = maximize_f((-beta * k.b).exp())?;
    Ok((f / ((beta * k.b).exp() * k.c_bar), a))
}

/// R̄_C = 𝔉(e^{2βB}) / (e^{2βB} C) (Penrose tree-graph variant); also a*.
pub fn radius_canonical_penrose(d: usize, pot: &Potential, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let k = model_constants(d, pot, beta)?;
    let (a, f) = maximize_f((2.0 * beta * k.b).exp())?;
    Ok((f / ((2.0 * beta * k.b).exp() * k.c), a))
}

fn nearest_neighbour(pot: &Potential) -> Result<f64> {
    match *pot {
        Potential::Standard { j } => Ok(j),
        Potential::Kac { .. } => Err(Error::invalid("potential.kind", "contour thresholds are stated for the nearest-neighbour model")),
    }
}

/// h_IS = −(2d + 1 + 2 log 2d + log 2)/(2β), M_IS = 2h_IS − 4dJ; −∞ at β = 0.
pub fn contour_threshold(d: usize, pot: &Potential, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let j = nearest_neighbour(pot)?;
    if beta == 0.0 {
        return Ok((f64::NEG_INFINITY, f64::NEG_INFINITY));
    }
    let dd = d as f64;
    let h = -(2.0 * dd + 1.0 + 2.0 * (2.0 * dd).ln() + 2f64.ln()) / (2.0 * beta);
    Ok((h, 2.0 * h - 4.0 * dd * j))
}

/// M_LG = −(1/β) log(e^{βB+1} C̄); −∞ at β = 0.
pub fn lattice_gas_threshold(d: usize, pot: &Potential, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let k = model_constants(d, pot, beta)?;
    Ok(-k.b - (1.0 + k.c_bar.ln()) / beta)
}

/// R_V = (2 e^{1+β(B+B*)} C̄)^{−1}, B* = ε (= 4J), so B + B* = 4J(2d+1).
pub fn radius_virial(d: usize, pot: &Potential, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let k = model_constants(d, pot, beta)?;
    Ok(1.0 / (2.0 * (1.0 + beta * (k.b + pot.depth())).exp() * k.c_bar))
}

/// All five bounds at one (d, β).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub d: usize,
    pub beta: f64,
    pub r_c: f64,
    pub r_c_bar: f64,
    pub h_is: f64,
    pub m_is: f64,
    pub m_lg: f64,
    pub r_v: f64,
    pub a_star_rc: f64,
    pub a_star_rcbar: f64,
}

pub fn radius_report(d: usize, pot: &Potential, beta: f64) -> Result<RadiusReport> {
    let (r_c, a_star_rc) = radius_canonical(d, pot, beta)?;
    let (r_c_bar, a_star_rcbar) = radius_canonical_penrose(d, pot, beta)?;
    let (h_is, m_is) = contour_threshold(d, pot, beta)?;
    Ok(RadiusReport {
        d,
        beta,
        r_c,
        r_c_bar,
        h_is,
        m_is,
        m_lg: lattice_gas_threshold(d, pot, beta)?,
        r_v: radius_virial(d, pot, beta)?,
        a_star_rc,
        a_star_rcbar,
    })
}

/// The 101-point grid β = k/100, k = 0..=100.
pub fn beta_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

/// Number of sign changes of a sequence, zeros skipped.
pub fn sign_changes(xs: &[f64]) -> usize {
    let signs: Vec<bool> = xs.iter().filter(|&&x| x != 0.0).map(|&x| x > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Truncated bound on sup_i Σ_{V∋i} |ζ(V)| e^{a|V|}:
/// e^{a+βB} Σ_{n=2}^{min(N,n_cap)} C(N−1,n−1) n^{n−2}/|Λ|^{n−1} [e^{βB+a} C̄]^{n−1}.
pub fn lemma_lhs(n_particles: usize, volume: usize, d: usize, pot: &Potential, beta: f64, a: f64, n_cap: usize) -> Result<f64> {
    check_beta(beta)?;
    let k = model_constants(d, pot, beta)?;
    let x = (beta * k.b + a).exp() * k.c_bar;
    let mut s = 0.0;
    for n in 2..=n_particles.min(n_cap) {
        let nf = n as f64;
        let log_term = ln_binomial(n_particles - 1, n - 1) + (nf - 2.0) * nf.ln() - (nf - 1.0) * (volume as f64).ln() + (nf - 1.0) * x.ln();
        s += log_term.exp();
    }
    Ok((a + beta * k.b).exp() * s)
}
