//! Exact partition functions, probabilities and canonical correlations.
//!
//! Every interaction energy is −ε·k for an integer bond count k (interior
//! bonds plus bonds to occupied walls), so enumeration only has to count
//! occupancy subsets by (N, k). Counts are integers: merging per-thread
//! histograms is exact and independent of thread scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{self, Boundary, LatticeSpec, Potential};
use crate::xfloat::XFloat;
use crate::{logsumexp, Error, Result};

/// Largest volume the subset enumeration accepts.
pub const MAX_ENUM_SITES: usize = 24;
/// Largest chain the transfer matrix accepts.
pub const MAX_TM_SIDE: usize = 4096;
/// Largest volume for correlation enumeration.
pub const MAX_CORR_SITES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Enumeration,
    TransferMatrix,
}

/// log Z(N) for N = 0..=|Λ|; `-inf` marks Z(N) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTable {
    pub lattice: LatticeSpec,
    pub potential: Potential,
    pub beta: f64,
    pub log_z: Vec<f64>,
    pub method: Method,
}

impl CanonicalTable {
    pub fn volume(&self) -> usize {
        self.lattice.size()
    }

    /// log Z(N), `-inf` beyond the table.
    pub fn log_z(&self, n: usize) -> f64 {
        self.log_z.get(n).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// Canonical free energy βf(N) = −log Z(N)/|Λ|.
    pub fn beta_free_energy(&self, n: usize) -> f64 {
        -self.log_z(n) / self.volume() as f64
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be a finite real >= 0"));
    }
    Ok(())
}

struct Adjacency {
    nb: Vec<Vec<usize>>,
    field: Vec<u32>,
    max_k: usize,
}

fn adjacency(lat: &LatticeSpec, pot: &Potential) -> Adjacency {
    let n = lat.size();
    let mut nb = vec![Vec::new(); n];
    let bonds = lat.bonds(pot);
    for &(i, j) in &bonds {
        nb[i].push(j);
        nb[j].push(i);
    }
    let field: Vec<u32> = (0..n).map(|i| lat.gamma_bonds(i, pot) as u32).collect();
    let max_k = bonds.len() + field.iter().map(|&f| f as usize).sum::<usize>();
    Adjacency { nb, field, max_k }
}

fn subset_bonds(adj: &Adjacency, mask: u64) -> usize {
    let mut k = 0usize;
    for i in 0..adj.nb.len() {
        if mask >> i & 1 == 1 {
            k += adj.field[i] as usize;
            // repeated entries carry bond multiplicity
            k += adj.nb[i].iter().filter(|&&j| j > i && mask >> j & 1 == 1).count();
        }
    }
    k
}

/// Number of occupancy subsets with N particles and k bonds, indexed [N][k].
pub fn bond_histogram(lat: &LatticeSpec, pot: &Potential) -> Result<Vec<Vec<u64>>> {
    let n = lat.size();
    if n > MAX_ENUM_SITES {
        return Err(Error::Guard(format!("enumeration needs |Λ| <= {MAX_ENUM_SITES}, got {n}")));
    }
    pot.check_fits(lat)?;
    let adj = adjacency(lat, pot);
    let prefix = n.saturating_sub(12).min(10);
    let low = n - prefix;
    let width = adj.max_k + 1;
    let merged = (0u64..1 << prefix)
        .into_par_iter()
        .map(|hi| {
            let mut h = vec![0u64; (n + 1) * width];
            let mut mask = hi << low;
            let mut k = subset_bonds(&adj, mask);
            let mut cnt = mask.count_ones() as usize;
            h[cnt * width + k] += 1;
            for t in 1u64..1 << low {
                let b = t.trailing_zeros() as usize;
                let bit = 1u64 << b;
                let touch = adj.field[b] as usize + adj.nb[b].iter().filter(|&&j| mask >> j & 1 == 1).count();
                if mask & bit == 0 {
                    mask |= bit;
                    k += touch;
                    cnt += 1;
                } else {
                    mask &= !bit;
                    k -= touch;
                    cnt -= 1;
                }
                h[cnt * width + k] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; (n + 1) * width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(merged.chunks(width).map(|c| c.to_vec()).collect())
}

/// Turns a bond histogram into log Z(N) at inverse temperature β.
pub fn table_from_histogram(lat: &LatticeSpec, pot: &Potential, beta: f64, hist: &[Vec<u64>]) -> CanonicalTable {
    let eps = pot.depth();
    let log_z = hist
        .iter()
        .map(|row| {
            let terms: Vec<f64> = row
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| (c as f64).ln() + beta * eps * k as f64)
                .collect();
            logsumexp(&terms)
        })
        .collect();
    CanonicalTable { lattice: lat.clone(), potential: *pot, beta, log_z, method: Method::Enumeration }
}

/// Z(N) = Σ_{|S| = N} e^{−βH(S)} by enumerating all occupancy subsets.
pub fn exact_canonical_table(lat: &LatticeSpec, pot: &Potential, beta: f64) -> Result<CanonicalTable> {
    check_beta(beta)?;
    let hist = bond_histogram(lat, pot)?;
    Ok(table_from_histogram(lat, pot, beta, &hist))
}

/// Fugacity polynomial of a nearest-neighbour chain by a 2-state transfer
/// matrix whose payload is the particle count; coefficients are exact Z(N).
pub fn transfer_matrix_table(l: usize, pot: &Potential, beta: f64, boundary: Boundary) -> Result<CanonicalTable> {
    check_beta(beta)?;
    if l > MAX_TM_SIDE {
        return Err(Error::Guard(format!("transfer matrix needs L <= {MAX_TM_SIDE}, got {l}")));
    }
    if !matches!(pot, Potential::Standard { .. }) {
        return Err(Error::Guard("transfer matrix supports the nearest-neighbour potential only".into()));
    }
    let periodic = match boundary {
        Boundary::Zero => false,
        Boundary::Periodic => true,
        Boundary::Fixed(_) => return Err(Error::Guard("transfer matrix supports zero or periodic boundaries".into())),
    };
    let lat = LatticeSpec::chain(l, boundary)?;
    let w = XFloat::exp(beta * pot.depth());
    let one = XFloat::ONE;
    let mut total = vec![XFloat::ZERO; l + 1];
    let starts: &[usize] = if periodic { &[0, 1] } else { &[2] };
    for &s0 in starts {
        // a0/a1: last site empty/occupied, index = particles so far
        let mut a0 = vec![XFloat::ZERO; l + 1];
        let mut a1 = vec![XFloat::ZERO; l + 1];
        if s0 != 1 {
            a0[0] = one;
        }
        if s0 != 0 {
            a1[1] = one;
        }
        for site in 1..l {
            let mut b0 = vec![XFloat::ZERO; l + 1];
            let mut b1 = vec![XFloat::ZERO; l + 1];
            for n in 0..=site {
                b0[n] = a0[n] + a1[n];
                b1[n + 1] = a0[n] + a1[n] * w;
            }
            a0 = b0;
            a1 = b1;
        }
        let close = if periodic && s0 == 1 { w } else { one };
        for n in 0..=l {
            total[n] += a0[n] + a1[n] * close;
        }
    }
    Ok(CanonicalTable {
        lattice: lat,
        potential: *pot,
        beta,
        log_z: total.iter().map(|x| x.ln()).collect(),
        method: Method::TransferMatrix,
    })
}

/// Grand-canonical quantities at chemical potential μ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrandCanonicalEval {
    pub mu: f64,
    pub log_xi: f64,
    /// βp = log Ξ/|Λ|.
    pub beta_p: f64,
    /// ℙ(A_N), N = 0..=|Λ|.
    pub probs: Vec<f64>,
}

impl GrandCanonicalEval {
    /// E[N]/|Λ|.
    pub fn density(&self) -> f64 {
        let v = (self.probs.len() - 1) as f64;
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / v
    }

    /// Finite-volume pressure p = log Ξ/(β|Λ|).
    pub fn pressure(&self, beta: f64) -> f64 {
        self.beta_p / beta
    }
}

/// log of the unnormalised weights βμN + log Z(N).
pub fn log_weights(table: &CanonicalTable, mu: f64) -> Vec<f64> {
    table.log_z.iter().enumerate().map(|(n, &lz)| table.beta * mu * n as f64 + lz).collect()
}

pub fn grand_canonical_eval(table: &CanonicalTable, mu: f64) -> GrandCanonicalEval {
    let w = log_weights(table, mu);
    let log_xi = logsumexp(&w);
    let probs = w.iter().map(|&x| (x - log_xi).exp()).collect();
    GrandCanonicalEval { mu, log_xi, beta_p: log_xi / table.volume() as f64, probs }
}

/// Exact one- and two-point densities at fixed N on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub lattice: LatticeSpec,
    pub n: usize,
    pub rho1: Vec<f64>,
    /// Row-major |Λ|×|Λ|; zero on the diagonal (hard core).
    pub rho2: Vec<f64>,
}

impl CorrelationTable {
    pub fn rho2(&self, q1: usize, q2: usize) -> f64 {
        self.rho2[q1 * self.rho1.len() + q2]
    }

    /// u²(q1,q2) = ρ²(q1,q2) − ρ¹(q1)ρ¹(q2).
    pub fn u2(&self, q1: usize, q2: usize) -> f64 {
        self.rho2(q1, q2) - self.rho1[q1] * self.rho1[q2]
    }
}

/// ρ¹, ρ² by enumerating all N-subsets of a periodic lattice.
pub fn exact_correlations(lat: &LatticeSpec, pot: &Potential, beta: f64, n: usize) -> Result<CorrelationTable> {
    check_beta(beta)?;
    let v = lat.size();
    if !lat.is_periodic() {
        return Err(Error::invalid("boundary", "correlations are defined on the torus"));
    }
    if v > MAX_CORR_SITES {
        return Err(Error::Guard(format!("correlations need |Λ| <= {MAX_CORR_SITES}, got {v}")));
    }
    if n < 2 || n > v {
        return Err(Error::invalid("N", format!("need 2 <= N <= |Λ| = {v}")));
    }
    pot.check_fits(lat)?;
    let adj = adjacency(lat, pot);
    let eps = pot.depth();
    let shift = adj.max_k.min(n * adj.nb.iter().map(|x| x.len()).max().unwrap_or(0)) as f64;
    let mut rho1 = vec![0.0; v];
    let mut rho2 = vec![0.0; v * v];
    let mut z = 0.0;
    // Gosper's hack over N-subsets, in increasing mask order
    let mut mask: u64 = (1u64 << n) - 1;
    let limit = 1u64 << v;
    let mut sites = Vec::with_capacity(n);
    while mask < limit {
        let k = subset_bonds(&adj, mask) as f64;
        let w = (beta * eps * (k - shift)).exp();
        z += w;
        sites.clear();
        sites.extend((0..v).filter(|&i| mask >> i & 1 == 1));
        for &a in &sites {
            rho1[a] += w;
            for &b in &sites {
                if a != b {
                    rho2[a * v + b] += w;
                }
            }
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    rho1.iter_mut().for_each(|x| *x /= z);
    rho2.iter_mut().for_each(|x| *x /= z);
    Ok(CorrelationTable { lattice: lat.clone(), n, rho1, rho2 })
}

/// Fixed-magnetisation Ising sum vs the lattice-gas side, both as logs:
/// (log Σ_{σ: m(σ)=m} e^{−βH_Is}, −β·offset(N) + log Z^γ(N)).
pub fn ising_gas_consistency(lat: &LatticeSpec, pot: &Potential, beta: f64, m: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let v = lat.size();
    if v > MAX_CORR_SITES {
        return Err(Error::Guard(format!("spin enumeration needs |Λ| <= {MAX_CORR_SITES}, got {v}")));
    }
    let nf = (m + 1.0) * v as f64 / 2.0;
    let n = nf.round();
    if (nf - n).abs() > 1e-9 || !(0.0..=v as f64).contains(&n) {
        return Err(Error::invalid("m", format!("m|Λ| must give an integral particle number, got N = {nf}")));
    }
    let n = n as usize;
    let mut terms = Vec::new();
    for mask in 0u64..1 << v {
        if mask.count_ones() as usize != n {
            continue;
        }
        let spins: Vec<i8> = (0..v).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
        terms.push(-beta * lattice::ising_hamiltonian(&spins, lat, pot)?);
    }
    let lhs = logsumexp(&terms);
    let table = exact_canonical_table(lat, pot, beta)?;
    let rhs = -beta * lattice::ising_offset(lat, pot, n) + table.log_z(n);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1() -> Potential {
        Potential::standard(1.0).unwrap()
    }

    #[test]
    fn two_site_chain() {
        let beta = 0.37;
        let lat = LatticeSpec::chain(2, Boundary::Zero).unwrap();
        let t = exact_canonical_table(&lat, &p1(), beta).unwrap();
        assert_eq!(t.log_z(0), 0.0);
        assert!((t.log_z(1) - 2f64.ln()).abs() < 1e-15);
        assert!((t.log_z(2) - 4.0 * beta).abs() < 1e-15);
        assert_eq!(t.log_z(3), f64::NEG_INFINITY);
        let tm = transfer_matrix_table(2, &p1(), beta, Boundary::Zero).unwrap();
        for n in 0..=2 {
            assert!((tm.log_z(n) - t.log_z(n)).abs() < 1e-14);
        }
    }

    #[test]
    fn free_counting() {
        let t = transfer_matrix_table(30, &p1(), 0.0, Boundary::Zero).unwrap();
        for n in 0..=30 {
            assert!((t.log_z(n) - crate::ln_binomial(30, n)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_site_torus_double_bond() {
        let beta = 0.2;
        let lat = LatticeSpec::chain(2, Boundary::Periodic).unwrap();
        let t = exact_canonical_table(&lat, &p1(), beta).unwrap();
        assert!((t.log_z(2) - 8.0 * beta).abs() < 1e-15);
        let tm = transfer_matrix_table(2, &p1(), beta, Boundary::Periodic).unwrap();
        assert!((tm.log_z(2) - 8.0 * beta).abs() < 1e-15);
    }

    #[test]
    fn gc_two_site() {
        let beta = 0.5;
        let mu = -0.3;
        let lat = LatticeSpec::chain(2, Boundary::Zero).unwrap();
        let t = exact_canonical_table(&lat, &p1(), beta).unwrap();
        let g = grand_canonical_eval(&t, mu);
        let z = (beta * mu).exp();
        let xi = 1.0 + 2.0 * z + (4.0 * beta).exp() * z * z;
        assert!((g.probs[1] - 2.0 * z / xi).abs() < 1e-15);
        assert!((g.probs.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let g2 = grand_canonical_eval(&t, -1e4);
        assert!((g2.probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guards() {
        let big = LatticeSpec::new(1, 25, Boundary::Zero).unwrap();
        assert!(matches!(exact_canonical_table(&big, &p1(), 0.1), Err(Error::Guard(_))));
        assert!(matches!(transfer_matrix_table(5000, &p1(), 0.1, Boundary::Zero), Err(Error::Guard(_))));
        let kac = Potential::kac(2).unwrap();
        assert!(matches!(transfer_matrix_table(10, &kac, 0.1, Boundary::Zero), Err(Error::Guard(_))));
        assert!(exact_canonical_table(&big, &p1(), -1.0).is_err());
    }

    #[test]
    fn correlations_beta_zero() {
        let lat = LatticeSpec::chain(8, Boundary::Periodic).unwrap();
        let c = exact_correlations(&lat, &p1(), 0.0, 3).unwrap();
        let v = 8.0;
        let n = 3.0;
        for q in 0..8 {
            assert!((c.rho1[q] - n / v).abs() < 1e-14);
        }
        let r2 = n * (n - 1.0) / (v * (v - 1.0));
        assert!((c.rho2(0, 3) - r2).abs() < 1e-14);
        assert!((c.u2(0, 3) - (r2 - n * n / (v * v))).abs() < 1e-14);
        assert_eq!(c.rho2(2, 2), 0.0);
    }

    #[test]
    fn consistency_examples() {
        let p = p1();
        let lat = LatticeSpec::chain(4, Boundary::Zero).unwrap();
        let (a, b) = ising_gas_consistency(&lat, &p, 0.3, -0.5).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        let (a, b) = ising_gas_consistency(&lat, &p, 0.3, -1.0).unwrap();
        assert!((a - b).abs() < 1e-12);
        let sq = LatticeSpec::new(2, 3, Boundary::Zero).unwrap();
        let (a, b) = ising_gas_consistency(&sq, &p, 0.4, -7.0 / 9.0).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!(ising_gas_consistency(&lat, &p, 0.3, -0.3).is_err());
    }
}
