//! Mayer coefficients, the finite-volume canonical expansion, the free
//! energy ℱ and the virial series.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graphs::{self, LabeledGraph};
use crate::lattice::{model_constants, Boundary, Potential};
use crate::oracle::CanonicalTable;
use crate::{ln_factorial, poly, Error, Result};

/// Largest n for b_n.
pub const MAX_B_ORDER: usize = 5;
/// Largest n for β_n.
pub const MAX_BETA_ORDER: usize = 4;
/// Largest derivative of ℱ provided.
pub const MAX_DERIVATIVE: usize = 6;

/// f(x) = e^{−βV(x)} − 1 with f(0) = −1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MayerWeights {
    pub beta: f64,
    pub pot: Potential,
}

impl MayerWeights {
    pub fn new(pot: Potential, beta: f64) -> Self {
        MayerWeights { beta, pot }
    }

    pub fn eval(&self, delta: &[i64]) -> f64 {
        match self.pot.eval(delta) {
            crate::lattice::Energy::Excluded => -1.0,
            crate::lattice::Energy::Finite(v) => (-self.beta * v).exp_m1(),
        }
    }

    /// Radius outside of which f vanishes.
    pub fn support_radius(&self) -> u32 {
        self.pot.range()
    }
}

/// Spanning-tree placement order of a connected graph: `(vertex, parent)`
/// in breadth-first order from vertex 0.
fn bfs_order(g: &LabeledGraph) -> Vec<(usize, usize)> {
    let adj = g.adjacency();
    let mut seen = 1u32;
    let mut queue = vec![0usize];
    let mut out = Vec::new();
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        for w in 0..g.vertices() {
            if adj[v] >> w & 1 == 1 && seen >> w & 1 == 0 {
                seen |= 1 << w;
                queue.push(w);
                out.push((w, v));
            }
        }
    }
    out
}

/// Σ over x_1 = 0 and x_2..x_n ∈ Z^d of Π_{(i,j)∈E(g)} f(x_i − x_j).
///
/// Only configurations whose spanning-tree edges all carry f ≠ 0 contribute,
/// so each vertex is placed within the support (or on top) of its BFS parent.
pub fn graph_lattice_sum(g: &LabeledGraph, d: usize, w: &MayerWeights) -> f64 {
    let n = g.vertices();
    let order = bfs_order(g);
    assert_eq!(order.len() + 1, n, "graph must be connected");
    let mut steps = vec![vec![0i64; d]];
    steps.extend(w.pot.offsets(d));
    let edges = g.edges();
    let mut pos = vec![vec![0i64; d]; n];
    let mut total = 0.0;
    let mut idx = vec![0usize; order.len()];
    let m = steps.len();
    loop {
        for (k, &(v, p)) in order.iter().enumerate() {
            let s = &steps[idx[k]];
            pos[v] = pos[p].iter().zip(s).map(|(a, b)| a + b).collect();
        }
        let mut prod = 1.0;
        for &(i, j) in &edges {
            let delta: Vec<i64> = pos[i].iter().zip(&pos[j]).map(|(a, b)| a - b).collect();
            prod *= w.eval(&delta);
            if prod == 0.0 {
                break;
            }
        }
        total += prod;
        let mut k = 0;
        loop {
            if k == idx.len() {
                return total;
            }
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be a finite real >= 0"));
    }
    Ok(())
}

/// b_n = (1/n!) Σ_{g∈C_n} Σ_{x_2..x_n} Π f, with x_1 pinned at 0.
pub fn compute_b_n(n: usize, d: usize, pot: &Potential, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if n == 0 || n > MAX_B_ORDER {
        return Err(Error::Guard(format!("b_n needs 1 <= n <= {MAX_B_ORDER}, got {n}")));
    }
    let w = MayerWeights::new(*pot, beta);
    let graphs: Vec<LabeledGraph> = graphs::enumerate_connected(n)?.collect();
    let parts: Vec<f64> = graphs.par_iter().map(|g| graph_lattice_sum(g, d, &w)).collect();
    Ok(parts.iter().sum::<f64>() / ln_factorial(n).exp())
}

/// β_n = (1/n!) Σ_{g∈B_{n+1}} Σ_{x_2..x_{n+1}} Π f, with x_1 pinned at 0.
pub fn compute_beta_irr(n: usize, d: usize, pot: &Potential, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if n == 0 || n > MAX_BETA_ORDER {
        return Err(Error::Guard(format!("β_n needs 1 <= n <= {MAX_BETA_ORDER}, got {n}")));
    }
    let w = MayerWeights::new(*pot, beta);
    let graphs: Vec<LabeledGraph> = graphs::enumerate_biconnected(n + 1)?.collect();
    let parts: Vec<f64> = graphs.par_iter().map(|g| graph_lattice_sum(g, d, &w)).collect();
    Ok(parts.iter().sum::<f64>() / ln_factorial(n).exp())
}

/// P_{N,|Λ|}(n) = (N−1)…(N−n)/|Λ|^n for n < N, else 0.
pub fn p_factor(n_particles: usize, volume: usize, n: usize) -> f64 {
    if n >= n_particles {
        return 0.0;
    }
    (1..=n).map(|k| (n_particles - k) as f64 / volume as f64).product()
}

/// F_{β,N,Λ}(n) = P_{N,|Λ|}(n)·B_Λ(n)/(n+1).
pub fn f_coefficient(n_particles: usize, volume: usize, n: usize, b_lambda_n: f64) -> f64 {
    p_factor(n_particles, volume, n) * b_lambda_n / (n + 1) as f64
}

/// log(|Λ|^N/N!).
pub fn ideal_log_z(n_particles: usize, volume: usize) -> f64 {
    n_particles as f64 * (volume as f64).ln() - ln_factorial(n_particles)
}

/// log Z^int(N) = log Z(N) − log(|Λ|^N/N!).
pub fn log_z_int(table: &CanonicalTable, n_particles: usize) -> f64 {
    table.log_z(n_particles) - ideal_log_z(n_particles, table.volume())
}

/// Solves the triangular system
/// log Z^int(N) = Σ_{n<N} N·P_{N,|Λ|}(n)·B_Λ(n)/(n+1), N = 2..=n_max+1,
/// for B_Λ(1..=n_max) (returned 0-based: `out[n-1] = B_Λ(n)`).
pub fn extract_b_lambda(table: &CanonicalTable, n_max: usize) -> Result<Vec<f64>> {
    if matches!(table.lattice.boundary(), Boundary::Fixed(_)) {
        return Err(Error::invalid("boundary", "extraction needs zero or periodic boundary"));
    }
    let v = table.volume();
    if n_max + 1 > v || n_max + 1 >= table.log_z.len() {
        return Err(Error::Guard(format!("extraction to order {n_max} needs N up to {} in a table of |Λ| = {v}", n_max + 1)));
    }
    let mut b = Vec::with_capacity(n_max);
    for np in 2..=n_max + 1 {
        // compensated sum of the known lower-order terms
        let mut acc = log_z_int(table, np);
        let mut comp = 0.0;
        for (k, &bk) in b.iter().enumerate() {
            let n = k + 1;
            let term = -(np as f64) * f_coefficient(np, v, n, bk);
            let t = acc + term;
            comp += if acc.abs() >= term.abs() { (acc - t) + term } else { (term - t) + acc };
            acc = t;
        }
        let lead = p_factor(np, v, np - 1);
        b.push((acc + comp) / lead);
    }
    Ok(b)
}

/// log Z(N) rebuilt from B_Λ by the canonical expansion (exact for N ≤ n_max+1).
pub fn reconstruct_log_z(b_lambda: &[f64], volume: usize, n_particles: usize) -> f64 {
    let s: f64 = b_lambda
        .iter()
        .enumerate()
        .map(|(k, &bk)| n_particles as f64 * f_coefficient(n_particles, volume, k + 1, bk))
        .sum();
    ideal_log_z(n_particles, volume) + s
}

/// ζ = |Λ|^{−2} Σ_{x1,x2∈Λ} f(x1,x2) (with bond multiplicity); B_Λ(1) = |Λ| log(1+ζ).
pub fn direct_b_lambda_1(lat: &crate::lattice::LatticeSpec, pot: &Potential, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if matches!(lat.boundary(), Boundary::Fixed(_)) {
        return Err(Error::invalid("boundary", "needs zero or periodic boundary"));
    }
    let v = lat.size();
    // diagonal: f(0) = −1; a pair joined by m bonds has f = e^{mβε} − 1
    let mut s = -(v as f64);
    let mut mult = std::collections::BTreeMap::new();
    for (i, j) in lat.bonds(pot) {
        let key = if i < j { (i, j) } else { (j, i) };
        *mult.entry(key).or_insert(0usize) += 1;
    }
    for (_, m) in mult {
        s += 2.0 * (beta * pot.depth() * m as f64).exp_m1();
    }
    let zeta = s / (v as f64 * v as f64);
    Ok(v as f64 * zeta.ln_1p())
}

/// Which coefficients feed ℱ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefficientSource {
    /// B_Λ(n) with the finite-volume polynomials 𝒫_{n+1,|Λ|}.
    FiniteVolume { volume: usize, b_lambda: Vec<f64> },
    /// β_n with ρ^{n+1}.
    Thermodynamic { beta_irr: Vec<f64> },
}

/// βℱ(ρ) = ρ(log ρ − 1) − Σ_n 𝒫_{n+1}(ρ)·c_n/(n+1) and its derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFreeEnergy {
    pub source: CoefficientSource,
}

impl CanonicalFreeEnergy {
    pub fn finite_volume(volume: usize, b_lambda: Vec<f64>) -> Self {
        CanonicalFreeEnergy { source: CoefficientSource::FiniteVolume { volume, b_lambda } }
    }

    pub fn thermodynamic(beta_irr: Vec<f64>) -> Self {
        CanonicalFreeEnergy { source: CoefficientSource::Thermodynamic { beta_irr } }
    }

    /// Pure ideal gas.
    pub fn ideal() -> Self {
        Self::thermodynamic(Vec::new())
    }

    /// Highest interaction order present.
    pub fn order(&self) -> usize {
        match &self.source {
            CoefficientSource::FiniteVolume { b_lambda, .. } => b_lambda.len(),
            CoefficientSource::Thermodynamic { beta_irr } => beta_irr.len(),
        }
    }

    /// (𝒫_{n+1} as a polynomial, coefficient) pairs active at ρ.
    fn terms(&self, rho: f64) -> Vec<(Vec<f64>, f64)> {
        match &self.source {
            CoefficientSource::FiniteVolume { volume, b_lambda } => b_lambda
                .iter()
                .enumerate()
                .filter_map(|(k, &c)| {
                    let n = k + 1;
                    if (n as f64) / (*volume as f64) > rho {
                        return None;
                    }
                    let roots: Vec<f64> = (0..=n).map(|j| j as f64 / *volume as f64).collect();
                    Some((poly::from_roots(&roots), c / (n + 1) as f64))
                })
                .collect(),
            CoefficientSource::Thermodynamic { beta_irr } => beta_irr
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let n = k + 1;
                    let mut p = vec![0.0; n + 2];
                    p[n + 1] = 1.0;
                    (p, c / (n + 1) as f64)
                })
                .collect(),
        }
    }

    /// βℱ^{(m)}(ρ), m ∈ 0..=6, 0 < ρ < 1.
    pub fn beta_f(&self, rho: f64, m: usize) -> Result<f64> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::invalid("rho", format!("must lie in (0,1), got {rho}")));
        }
        if m > MAX_DERIVATIVE {
            return Err(Error::Guard(format!("derivative order {m} exceeds cap {MAX_DERIVATIVE}")));
        }
        let ideal = match m {
            0 => rho * (rho.ln() - 1.0),
            1 => rho.ln(),
            _ => {
                let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * ln_factorial(m - 2).exp() / rho.powi(m as i32 - 1)
            }
        };
        let mut inter = 0.0;
        for (mut p, c) in self.terms(rho) {
            for _ in 0..m {
                p = poly::derivative(&p);
            }
            inter += poly::eval(&p, rho) * c;
        }
        Ok(ideal - inter)
    }
}

/// βS_{|Λ|}(ρ_Λ) = −(1/|Λ|) log(|Λ|^N/N!) − ρ_Λ(log ρ_Λ − 1), so that
/// βf(N) = βℱ(ρ_Λ) + βS(ρ_Λ) with finite-volume coefficients.
pub fn stirling_remainder(n_particles: usize, volume: usize) -> Result<f64> {
    if n_particles == 0 || n_particles > volume {
        return Err(Error::invalid("N", format!("need 1 <= N <= |Λ| = {volume}")));
    }
    let rho = n_particles as f64 / volume as f64;
    Ok(-ideal_log_z(n_particles, volume) / volume as f64 - rho * (rho.ln() - 1.0))
}

/// The three density/fugacity series of the thermodynamic limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialSeries {
    pub order: usize,
    pub beta_irr: Vec<f64>,
    /// Coefficients of βμ(ρ) − log ρ = −Σ β_n ρ^n.
    pub mu: Vec<f64>,
    /// βp(ρ) = ρ − Σ nβ_n ρ^{n+1}/(n+1).
    pub pressure_rho: Vec<f64>,
    /// z(ρ) = ρ·exp(−Σβ_nρ^n).
    pub z_of_rho: Vec<f64>,
    /// ρ(z), the compositional inverse.
    pub rho_of_z: Vec<f64>,
    /// βp(z) = Σ b_n z^n.
    pub pressure_z: Vec<f64>,
}

pub fn virial_series(beta_irr: &[f64], order: usize) -> Result<VirialSeries> {
    if order == 0 || order > beta_irr.len() {
        return Err(Error::Guard(format!("virial order {order} needs that many β_n ({} given)", beta_irr.len())));
    }
    let top = order + 1;
    let mut mu = vec![0.0; order + 1];
    for n in 1..=order {
        mu[n] = -beta_irr[n - 1];
    }
    let mut p = vec![0.0; top + 1];
    p[1] = 1.0;
    for n in 1..=order {
        p[n + 1] = -(n as f64) * beta_irr[n - 1] / (n + 1) as f64;
    }
    let z_of_rho = poly::mul(&[0.0, 1.0], &poly::exp(&mu, top), top);
    let rho_of_z = poly::revert(&z_of_rho, top);
    let pressure_z = poly::compose(&p, &rho_of_z, top);
    Ok(VirialSeries { order, beta_irr: beta_irr[..order].to_vec(), mu, pressure_rho: p, z_of_rho, rho_of_z, pressure_z })
}

impl VirialSeries {
    /// βμ(ρ) = log ρ − Σ β_n ρ^n.
    pub fn beta_mu(&self, rho: f64) -> f64 {
        rho.ln() + poly::eval(&self.mu, rho)
    }

    pub fn beta_p_of_rho(&self, rho: f64) -> f64 {
        poly::eval(&self.pressure_rho, rho)
    }

    /// ρ(z) by fixed-point iteration of ρ = z·exp(Σβ_nρ^n), small z only.
    pub fn rho_of_z_numeric(&self, z: f64) -> Result<f64> {
        let mut rho = z;
        for _ in 0..10_000 {
            let next = z * (-poly::eval(&self.mu, rho)).exp();
            if (next - rho).abs() <= 1e-15 * rho.abs().max(1e-300) {
                return Ok(next);
            }
            rho = next;
        }
        Err(Error::Guard(format!("fixed point for ρ(z) did not converge at z = {z}")))
    }

    /// Polynomial coefficients of βf(ρ) − ρ(log ρ − 1) computed two ways:
    /// directly, −Σβ_nρ^{n+1}/(n+1), and as ρ·βμ − βp (Legendre).
    pub fn legendre_coefficients(&self) -> (Vec<f64>, Vec<f64>) {
        let top = self.order + 1;
        let mut direct = vec![0.0; top + 1];
        for n in 1..=self.order {
            direct[n + 1] = -self.beta_irr[n - 1] / (n + 1) as f64;
        }
        // ρ·(βμ − log ρ) − (βp − ρ); the ρ log ρ − ρ parts match identically
        let rho_mu = poly::mul(&[0.0, 1.0], &self.mu, top);
        let mut legendre = vec![0.0; top + 1];
        for k in 0..=top {
            let pk = self.pressure_rho.get(k).copied().unwrap_or(0.0) - if k == 1 { 1.0 } else { 0.0 };
            legendre[k] = rho_mu[k] - pk;
        }
        (direct, legendre)
    }
}

/// Per-configuration tree-graph comparison summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeGraphReport {
    pub n: usize,
    pub d: usize,
    pub beta: f64,
    /// Box configurations visited.
    pub configurations: u64,
    /// Configurations with a connected proximity graph.
    pub contributing: u64,
    pub violations: u64,
    pub lhs_total: f64,
    pub rhs_total: f64,
    /// max lhs/rhs over contributing configurations.
    pub max_ratio: f64,
}

/// Σ over connected graphs of Π f for one configuration, by the subset
/// recursion C(S) = W(S) − Σ_{T∋min S, T⊊S} C(T)·W(S∖T), W(S) = Π_{pairs}(1+f).
pub fn connected_sum(fmat: &[Vec<f64>]) -> f64 {
    let n = fmat.len();
    let full = (1usize << n) - 1;
    let mut w = vec![1.0f64; full + 1];
    for s in 1..=full {
        let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
        let rest = s & !(1 << top);
        let mut prod = w[rest];
        for j in 0..top {
            if rest >> j & 1 == 1 {
                prod *= 1.0 + fmat[top][j];
            }
        }
        w[s] = prod;
    }
    let mut c = vec![0.0f64; full + 1];
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let others = s & !low;
        let mut val = w[s];
        // proper subsets T of s containing `low`
        let mut sub = others;
        loop {
            let t = sub | low;
            if t != s {
                val -= c[t] * w[s & !t];
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        c[s] = val;
    }
    c[full]
}

/// Exhaustive check of |Σ_{g∈C_n} Π f| ≤ e^{βBn} Σ_{T∈T_n} Π (1 − e^{−β|V|})
/// over x_1 = 0, x_2..x_n ∈ [−(n−1), n−1]^d. A coincident pair has |V| = ∞.
pub fn tree_graph_check(n: usize, d: usize, pot: &Potential, beta: f64) -> Result<TreeGraphReport> {
    check_beta(beta)?;
    if !(2..=MAX_B_ORDER).contains(&n) {
        return Err(Error::Guard(format!("tree-graph check needs 2 <= n <= {MAX_B_ORDER}, got {n}")));
    }
    let consts = model_constants(d, pot, beta)?;
    let w = MayerWeights::new(*pot, beta);
    let trees: Vec<Vec<(usize, usize)>> = graphs::enumerate_trees(n)?.map(|t| t.edges()).collect();
    let r = (n - 1) as i64;
    let side = (2 * r + 1) as u64;
    let per_vertex = side.pow(d as u32);
    let free = n - 1;
    let total = per_vertex.pow(free as u32);
    let prefactor = (beta * consts.b * n as f64).exp();
    let tree_weight = |delta: &[i64]| -> f64 {
        match pot.eval(delta) {
            crate::lattice::Energy::Excluded => 1.0,
            crate::lattice::Energy::Finite(v) => -(-beta * v.abs()).exp_m1(),
        }
    };
    let decode = |mut code: u64| -> Vec<i64> {
        let mut c = vec![0i64; d];
        for x in c.iter_mut() {
            *x = (code % side) as i64 - r;
            code /= side;
        }
        c
    };
    let range = pot.range() as i64;
    let chunk = per_vertex;
    let results: Vec<(u64, u64, f64, f64, f64)> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|blk| {
            let mut contributing = 0u64;
            let mut viol = 0u64;
            let (mut lt, mut rt, mut mr) = (0.0f64, 0.0f64, 0.0f64);
            let mut pos = vec![vec![0i64; d]; n];
            for code in blk * chunk..((blk + 1) * chunk).min(total) {
                let mut c = code;
                for v in 1..n {
                    pos[v] = decode(c % per_vertex);
                    c /= per_vertex;
                }
                // proximity graph: f ≠ 0 within the support or on coincidence
                let mut adj = vec![0u32; n];
                for i in 0..n {
                    for j in i + 1..n {
                        let d2: i64 = pos[i].iter().zip(&pos[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                        if d2 <= range * range {
                            adj[i] |= 1 << j;
                            adj[j] |= 1 << i;
                        }
                    }
                }
                let mut seen = 1u32;
                let mut frontier = 1u32;
                while frontier != 0 {
                    let mut next = 0u32;
                    for v in 0..n {
                        if frontier >> v & 1 == 1 {
                            next |= adj[v];
                        }
                    }
                    next &= !seen;
                    seen |= next;
                    frontier = next;
                }
                if seen != (1u32 << n) - 1 {
                    continue;
                }
                contributing += 1;
                let mut fmat = vec![vec![0.0; n]; n];
                let mut tmat = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let delta: Vec<i64> = pos[i].iter().zip(&pos[j]).map(|(a, b)| a - b).collect();
                            fmat[i][j] = w.eval(&delta);
                            tmat[i][j] = tree_weight(&delta);
                        }
                    }
                }
                let lhs = connected_sum(&fmat).abs();
                let tsum: f64 = trees.iter().map(|t| t.iter().map(|&(i, j)| tmat[i][j]).product::<f64>()).sum();
                let rhs = prefactor * tsum;
                if lhs > rhs * (1.0 + 1e-12) {
                    viol += 1;
                }
                if rhs > 0.0 {
                    mr = mr.max(lhs / rhs);
                } else if lhs > 0.0 {
                    mr = f64::INFINITY;
                }
                lt += lhs;
                rt += rhs;
            }
            (contributing, viol, lt, rt, mr)
        })
        .collect();
    let mut rep = TreeGraphReport {
        n,
        d,
        beta,
        configurations: total,
        contributing: 0,
        violations: 0,
        lhs_total: 0.0,
        rhs_total: 0.0,
        max_ratio: 0.0,
    };
    for (c, v, l, r, m) in results {
        rep.contributing += c;
        rep.violations += v;
        rep.lhs_total += l;
        rep.rhs_total += r;
        rep.max_ratio = rep.max_ratio.max(m);
    }
    Ok(rep)
}

/// Coefficient summary for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoefficients {
    /// b_1..b_{n_max} (entries beyond the order guard are NaN).
    pub b: Vec<f64>,
    /// β_1..β_{n_max}.
    pub beta_irr: Vec<f64>,
    /// B_Λ(1..n_max), extracted from an exact table.
    pub b_lambda: Vec<f64>,
    pub n_max: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::oracle;

    #[test]
    fn low_orders_closed_form() {
        let p = Potential::standard(1.0).unwrap();
        for &beta in &[0.0, 0.1, 0.2, 0.7] {
            for d in 1..=3 {
                let b1 = compute_b_n(1, d, &p, beta).unwrap();
                assert_eq!(b1, 1.0);
                let b2 = compute_b_n(2, d, &p, beta).unwrap();
                let beta1 = compute_beta_irr(1, d, &p, beta).unwrap();
                let closed = 2.0 * d as f64 * (4.0 * beta).exp_m1() - 1.0;
                assert!((beta1 - closed).abs() < 1e-12);
                assert!((b2 - closed / 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn beta_zero_hard_core_values() {
        // pure hard core on a lattice: log(1+z) pressure, β_n = −1/(n... ) pattern
        let p = Potential::standard(1.0).unwrap();
        let want = [-1.0, -0.5, -1.0 / 3.0, -0.25];
        for n in 1..=4 {
            let v = compute_beta_irr(n, 1, &p, 0.0).unwrap();
            assert!((v - want[n - 1]).abs() < 1e-12, "n={n} v={v}");
        }
    }

    #[test]
    fn p_factor_examples() {
        assert!((p_factor(3, 10, 2) - 0.02).abs() < 1e-16);
        assert_eq!(p_factor(3, 10, 3), 0.0);
        assert_eq!(f_coefficient(2, 10, 5, 1.0), 0.0);
    }

    #[test]
    fn extraction_b1_closed_forms() {
        let p = Potential::standard(1.0).unwrap();
        let lat = LatticeSpec::chain(9, Boundary::Periodic).unwrap();
        let t = oracle::exact_canonical_table(&lat, &p, 0.0).unwrap();
        let b = extract_b_lambda(&t, 3).unwrap();
        assert!((b[0] - 9.0 * (1.0 - 1.0 / 9.0f64).ln()).abs() < 1e-12);
        let t = oracle::exact_canonical_table(&lat, &p, 0.3).unwrap();
        let b = extract_b_lambda(&t, 3).unwrap();
        let direct = direct_b_lambda_1(&lat, &p, 0.3).unwrap();
        assert!((b[0] - direct).abs() < 1e-11);
        for np in 0..=4 {
            assert!((reconstruct_log_z(&b, 9, np) - t.log_z(np)).abs() < 1e-12);
        }
        assert!(extract_b_lambda(&t, 9).is_err());
    }

    #[test]
    fn ideal_free_energy() {
        let f = CanonicalFreeEnergy::ideal();
        let rho = 0.3;
        assert!((f.beta_f(rho, 0).unwrap() - rho * (rho.ln() - 1.0)).abs() < 1e-15);
        assert!((f.beta_f(rho, 2).unwrap() - 1.0 / rho).abs() < 1e-14);
        assert!((f.beta_f(rho, 3).unwrap() + 1.0 / (rho * rho)).abs() < 1e-12);
        assert!(f.beta_f(1.2, 0).is_err());
        assert!(f.beta_f(0.2, 7).is_err());
    }

    #[test]
    fn finite_volume_polynomial_identity() {
        // 𝒫_{n+1}(N/|Λ|) = (N/|Λ|)·P_{N,|Λ|}(n)
        let v = 12;
        for n in 1..5 {
            let roots: Vec<f64> = (0..=n).map(|j| j as f64 / v as f64).collect();
            let p = poly::from_roots(&roots);
            for np in 1..=v {
                let rho = np as f64 / v as f64;
                let lhs = if n as f64 / v as f64 <= rho { poly::eval(&p, rho) } else { 0.0 };
                assert!((lhs - rho * p_factor(np, v, n)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stirling_examples() {
        let v = 20;
        let s = stirling_remainder(v, v).unwrap();
        assert!((s - (-(v as f64 * (v as f64).ln() - ln_factorial(v)) / v as f64 + 1.0)).abs() < 1e-13);
        assert!(stirling_remainder(0, v).is_err());
    }

    #[test]
    fn connected_sum_small() {
        // n = 2: Σ over connected graphs is just f12
        let f = vec![vec![0.0, 0.3], vec![0.3, 0.0]];
        assert!((connected_sum(&f) - 0.3).abs() < 1e-15);
        // n = 3: f12 f13 + f12 f23 + f13 f23 + f12 f13 f23
        let (a, b, c) = (0.2, -0.4, 0.7);
        let f = vec![vec![0.0, a, b], vec![a, 0.0, c], vec![b, c, 0.0]];
        let want = a * b + a * c + b * c + a * b * c;
        assert!((connected_sum(&f) - want).abs() < 1e-15);
    }

    #[test]
    fn virial_first_orders() {
        let beta = [0.4, -0.3, 0.2, 0.1];
        let v = virial_series(&beta, 4).unwrap();
        assert!((v.pressure_z[1] - 1.0).abs() < 1e-15);
        assert!((v.pressure_z[2] - beta[0] / 2.0).abs() < 1e-15);
        let (a, b) = v.legendre_coefficients();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        let z = 1e-3;
        let rho = v.rho_of_z_numeric(z).unwrap();
        assert!((rho - poly::eval(&v.rho_of_z, z)).abs() < 1e-14);
        assert!(virial_series(&beta, 5).is_err());
    }

    #[test]
    fn tree_graph_pair() {
        let p = Potential::standard(1.0).unwrap();
        let r = tree_graph_check(2, 1, &p, 0.5).unwrap();
        assert_eq!(r.configurations, 3);
        assert_eq!(r.contributing, 3);
        assert_eq!(r.violations, 0);
    }
}
