//! Mean occupation, most likely N, tilted measures, and the large/moderate
//! deviation and local-CLT formulas checked against exact probabilities.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::oracle::{grand_canonical_eval, log_weights, CanonicalTable};
use crate::series::{extract_b_lambda, CanonicalFreeEnergy, MAX_DERIVATIVE};
use crate::{bounds, logsumexp, ln_factorial, Error, Result};

/// Order of B_Λ(n) fed into ℱ by [`formula_probability`].
pub const FREE_ENERGY_ORDER: usize = 4;
const MU_TOL: f64 = 1e-12;

/// (ρ̄_Λ, N̄) with ρ̄_Λ = E_{μ0}[N]/|Λ| and N̄ = ⌊ρ̄_Λ|Λ|⌋.
pub fn mean_occupation(table: &CanonicalTable, mu0: f64) -> (f64, usize) {
    let rho = grand_canonical_eval(table, mu0).density();
    (rho, (rho * table.volume() as f64).floor() as usize)
}

/// argmax_N βμN + log Z(N), smallest N on ties.
pub fn find_n_star(table: &CanonicalTable, mu: f64) -> usize {
    let w = log_weights(table, mu);
    let mut best = 0;
    for (n, &x) in w.iter().enumerate() {
        if x > w[best] {
            best = n;
        }
    }
    best
}

fn mean_n(table: &CanonicalTable, mu: f64) -> f64 {
    grand_canonical_eval(table, mu).density() * table.volume() as f64
}

/// μ̃ with E_μ̃[N] = Ñ, by bisection on an adaptively widened bracket.
pub fn tilted_potential(table: &CanonicalTable, n_tilde: f64) -> Result<f64> {
    let v = table.volume() as f64;
    if !(n_tilde > 0.0 && n_tilde < v) {
        return Err(Error::Guard(format!("tilted potential needs 0 < Ñ < |Λ| = {v}, got {n_tilde}")));
    }
    if table.beta <= 0.0 {
        return Err(Error::Guard("tilted potential needs β > 0".into()));
    }
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while mean_n(table, lo) > n_tilde {
        lo *= 2.0;
        if lo < -1e12 {
            return Err(Error::Guard("no bracket for the tilted potential".into()));
        }
    }
    while mean_n(table, hi) < n_tilde {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Guard("no bracket for the tilted potential".into()));
        }
    }
    while hi - lo > MU_TOL * lo.abs().max(hi.abs()).max(1.0) {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if mean_n(table, m) < n_tilde {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// I^GC(ρ̃; ρ̄) = β[ρ̃μ̃ − p(μ̃)] − β[ρ̄μ0 − p(μ0)] − βμ0(ρ̃ − ρ̄), exact
/// finite-volume pressures; also returns μ̃.
pub fn rate_function(table: &CanonicalTable, rho_tilde: f64, mu0: f64) -> Result<(f64, f64)> {
    let v = table.volume() as f64;
    let mu_t = tilted_potential(table, rho_tilde * v)?;
    let beta = table.beta;
    let g0 = grand_canonical_eval(table, mu0);
    let gt = grand_canonical_eval(table, mu_t);
    let rho_bar = g0.density();
    let i = (beta * rho_tilde * mu_t - gt.beta_p) - (beta * rho_bar * mu0 - g0.beta_p) - beta * mu0 * (rho_tilde - rho_bar);
    Ok((i, mu_t))
}

/// m(α) = min{m ∈ ℕ : m(1−α) − 1 > 0}, exact in rationals.
pub fn m_alpha(alpha: Ratio<i64>) -> Result<usize> {
    let half = Ratio::new(1, 2);
    if alpha < half || alpha >= Ratio::from_integer(1) {
        return Err(Error::invalid("alpha", format!("m(α) needs 1/2 <= α < 1, got {alpha}")));
    }
    let gap = Ratio::from_integer(1) - alpha;
    let mut m = 1i64;
    while Ratio::from_integer(m) * gap - Ratio::from_integer(1) <= Ratio::from_integer(0) {
        m += 1;
    }
    Ok(m as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceTerms {
    pub d: f64,
    pub d_alpha: f64,
    pub d_alpha_plus: f64,
    pub m_alpha: usize,
    /// Error envelope including the certified tail slack.
    pub e: f64,
    pub tail_slack: f64,
}

/// D, D^α, D^{α,+}, m(α) and E_{|Λ|}(α, u′, ρ*) for α ∈ [1/2, 1).
///
/// `beta_mu0` enters the chemical-potential term of the error envelope.
pub fn variance_terms(rho: f64, alpha: Ratio<i64>, u_prime: f64, volume: usize, fe: &CanonicalFreeEnergy, beta_mu0: f64) -> Result<VarianceTerms> {
    let ma = m_alpha(alpha)?;
    if ma > MAX_DERIVATIVE {
        return Err(Error::Guard(format!("m(α) = {ma} exceeds the derivative cap {MAX_DERIVATIVE}")));
    }
    // the tail bound below needs derivatives ≥ 7 to be purely ideal
    if fe.order() + 1 >= 7 {
        return Err(Error::Guard(format!("free energy of order {} leaves a non-ideal tail past the derivative cap", fe.order())));
    }
    let a = *alpha.numer() as f64 / *alpha.denom() as f64;
    let vol = volume as f64;
    let s = vol.powf(1.0 - a);
    let fact = |m: usize| ln_factorial(m).exp();
    let f2 = fe.beta_f(rho, 2)?;
    let mut corr = 0.0;
    let mut corr_abs = 0.0;
    for m in 3..ma {
        let t = 2.0 * u_prime.powi(m as i32 - 2) * fe.beta_f(rho, m)? / (fact(m) * s.powi(m as i32 - 2));
        corr += t;
        corr_abs += t.abs();
    }
    let d = 1.0 / f2;
    let d_alpha = 1.0 / (f2 + corr);
    let d_alpha_plus = 1.0 / (f2 + corr_abs);
    let mf = ma as f64;
    let mut inner = u_prime.powi(ma as i32) * fe.beta_f(rho, ma)? / fact(ma);
    inner += u_prime * (beta_mu0 - fe.beta_f(rho, 1)?) / vol.powf(1.0 - mf * (1.0 - a) - a);
    for m in ma + 1..=MAX_DERIVATIVE {
        inner += u_prime.powi(m as i32) * fe.beta_f(rho, m)? / (fact(m) * s.powi((m - ma) as i32));
    }
    // Σ_{m≥7}: |βℱ^{(m)}| = (m−2)!/ρ^{m−1}, so each term is ρ|Λ|^{m(α)(1−α)} t^m/(m(m−1))
    let t = u_prime.abs() / (rho * s);
    let tail_slack = if t < 1.0 { rho * vol.powf(mf * (1.0 - a)) * t.powi(7) / (42.0 * (1.0 - t)) } else { f64::INFINITY };
    let pref = vol.powf(-(mf * (1.0 - a) - 1.0));
    Ok(VarianceTerms { d, d_alpha, d_alpha_plus, m_alpha: ma, e: pref * (inner.abs() + tail_slack), tail_slack })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationSpec {
    pub mu0: f64,
    pub alpha: Ratio<i64>,
    pub u: f64,
}

impl DeviationSpec {
    pub fn new(mu0: f64, alpha: Ratio<i64>, u: f64) -> Result<Self> {
        if !mu0.is_finite() {
            return Err(Error::invalid("mu0", "must be finite"));
        }
        if alpha < Ratio::new(1, 2) || alpha > Ratio::from_integer(1) {
            return Err(Error::invalid("alpha", format!("must lie in [1/2, 1], got {alpha}")));
        }
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::invalid("u", "must be a finite real >= 0"));
        }
        Ok(DeviationSpec { mu0, alpha, u })
    }
}

/// One row of the deviation report. Fields with no meaning for the chosen
/// α (the moderate-deviation terms at α = 1) are NaN, with m_alpha = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub l: usize,
    pub mu0: f64,
    pub alpha: f64,
    pub u: f64,
    pub u_prime: f64,
    pub rho_bar: f64,
    pub n_bar: usize,
    pub n_star: usize,
    pub n_tilde: usize,
    pub mu_tilde: f64,
    pub i_gc: f64,
    pub d: f64,
    pub d_alpha: f64,
    pub d_alpha_plus: f64,
    pub m_alpha: usize,
    pub e: f64,
    pub log_p_exact: f64,
    pub log_p_formula: f64,
    pub p_exact: f64,
    pub p_formula: f64,
    /// |p_exact − p_formula|/p_formula.
    pub gap: f64,
    /// ρ* < R_C, where the series for ℱ is controlled.
    pub in_regime: bool,
}

impl DeviationReport {
    /// log ℙ_exact − log formula.
    pub fn log_gap(&self) -> f64 {
        self.log_p_exact - self.log_p_formula
    }
}

/// Exact ℙ(A_Ñ) against the large-deviation (α = 1), moderate-deviation
/// (1/2 < α < 1) or local-CLT (α = 1/2) formula.
pub fn formula_probability(spec: &DeviationSpec, table: &CanonicalTable) -> Result<DeviationReport> {
    let v = table.volume();
    let vf = v as f64;
    let alpha = *spec.alpha.numer() as f64 / *spec.alpha.denom() as f64;
    let b_lambda = extract_b_lambda(table, FREE_ENERGY_ORDER)?;
    let fe = CanonicalFreeEnergy::finite_volume(v, b_lambda);
    let (rho_bar, n_bar) = mean_occupation(table, spec.mu0);
    let n_star = find_n_star(table, spec.mu0);
    let n_tilde = n_star as f64 + (spec.u * vf.powf(alpha)).round();
    if !(n_tilde > 0.0 && n_tilde < vf) {
        return Err(Error::Guard(format!("Ñ = {n_tilde} falls outside (0, |Λ| = {v})")));
    }
    let n_tilde = n_tilde as usize;
    let u_prime = (n_tilde - n_star) as f64 / vf.powf(alpha);
    if n_star == 0 {
        return Err(Error::Guard("N* = 0: the free energy is not defined at ρ* = 0".into()));
    }
    let rho_star = n_star as f64 / vf;
    let (i_gc, mu_tilde) = rate_function(table, n_tilde as f64 / vf, spec.mu0)?;
    let w = log_weights(table, spec.mu0);
    let log_p_exact = w[n_tilde] - logsumexp(&w);
    let two_pi = 2.0 * std::f64::consts::PI;
    let nan = f64::NAN;
    let (d, d_alpha, d_alpha_plus, m_alpha, e, log_p_formula) = if spec.alpha == Ratio::from_integer(1) {
        let n_star_t = find_n_star(table, mu_tilde);
        if n_star_t == 0 {
            return Err(Error::Guard("Ñ* = 0 under the tilted measure".into()));
        }
        let d = 1.0 / fe.beta_f(n_star_t as f64 / vf, 2)?;
        (d, nan, nan, 0, nan, -vf * i_gc - 0.5 * (two_pi * d * vf).ln())
    } else {
        let vt = variance_terms(rho_star, spec.alpha, u_prime, v, &fe, table.beta * spec.mu0)?;
        let lf = -u_prime * u_prime * vf.powf(2.0 * alpha - 1.0) / (2.0 * vt.d_alpha) - 0.5 * (two_pi * vt.d_alpha_plus * vf).ln();
        (vt.d, vt.d_alpha, vt.d_alpha_plus, vt.m_alpha, vt.e, lf)
    };
    if !(d > 0.0) {
        return Err(Error::Guard(format!("non-positive variance D = {d}")));
    }
    let (p_exact, p_formula) = (log_p_exact.exp(), log_p_formula.exp());
    let rc = bounds::radius_canonical(table.lattice.dim(), &table.potential, table.beta)?.0;
    Ok(DeviationReport {
        l: table.lattice.side(),
        mu0: spec.mu0,
        alpha,
        u: spec.u,
        u_prime,
        rho_bar,
        n_bar,
        n_star,
        n_tilde,
        mu_tilde,
        i_gc,
        d,
        d_alpha,
        d_alpha_plus,
        m_alpha,
        e,
        log_p_exact,
        log_p_formula,
        p_exact,
        p_formula,
        gap: (log_p_exact - log_p_formula).exp_m1().abs(),
        in_regime: rho_star < rc,
    })
}

/// log J^C_μ(N, N′) for every N, and log K(μ, N′) = −log Σ_N J^C(N, N′).
pub fn appendix_objects(table: &CanonicalTable, mu: f64, n_prime: usize) -> Result<(Vec<f64>, f64)> {
    let w = log_weights(table, mu);
    let anchor = *w.get(n_prime).ok_or_else(|| Error::invalid("N'", format!("must be <= |Λ| = {}", table.volume())))?;
    if anchor == f64::NEG_INFINITY {
        return Err(Error::Guard(format!("Z({n_prime}) = 0")));
    }
    let log_j: Vec<f64> = w.iter().map(|&x| x - anchor).collect();
    let log_k = -logsumexp(&log_j);
    Ok((log_j, log_k))
}

/// max_N |J^C(N,N′)K(μ,N′)/ℙ(A_N) − 1| over the given anchors.
pub fn decomposition_error(table: &CanonicalTable, mu: f64, anchors: &[usize]) -> Result<f64> {
    let w = log_weights(table, mu);
    let lx = logsumexp(&w);
    let mut worst = 0.0f64;
    for &np in anchors {
        let (log_j, log_k) = appendix_objects(table, mu, np)?;
        for (n, &lj) in log_j.iter().enumerate() {
            if w[n] == f64::NEG_INFINITY {
                continue;
            }
            worst = worst.max((lj + log_k - (w[n] - lx)).exp_m1().abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, Potential};
    use crate::oracle::transfer_matrix_table;

    fn l2(beta: f64) -> CanonicalTable {
        transfer_matrix_table(2, &Potential::standard(1.0).unwrap(), beta, Boundary::Zero).unwrap()
    }

    #[test]
    fn m_alpha_values() {
        assert_eq!(m_alpha(Ratio::new(1, 2)).unwrap(), 3);
        assert_eq!(m_alpha(Ratio::new(3, 4)).unwrap(), 5);
        assert_eq!(m_alpha(Ratio::new(2, 3)).unwrap(), 4);
        assert!(m_alpha(Ratio::from_integer(1)).is_err());
    }

    #[test]
    fn two_site_hand_values() {
        let (beta, mu) = (0.3, -0.7);
        let t = l2(beta);
        let z = (beta * mu).exp();
        let e = (4.0 * beta).exp();
        let rho = (2.0 * z + 2.0 * z * z * e) / (2.0 * (1.0 + 2.0 * z + z * z * e));
        assert!((mean_occupation(&t, mu).0 - rho).abs() < 1e-14);
        let cands = [0.0, beta * mu + 2f64.ln(), 2.0 * beta * mu + 4.0 * beta];
        let want = (0..3).fold(0, |b, i| if cands[i] > cands[b] { i } else { b });
        assert_eq!(find_n_star(&t, mu), want);
        // E[N] = 1: (2z + 2z²e)/(1 + 2z + z²e) = 1 ⇔ z²e = 1
        let mt = tilted_potential(&t, 1.0).unwrap();
        assert!((mt - (-2.0 * beta) / beta).abs() < 1e-10, "{mt}");
    }

    #[test]
    fn tilt_at_mean_returns_mu0() {
        let t = transfer_matrix_table(32, &Potential::standard(1.0).unwrap(), 0.1, Boundary::Zero).unwrap();
        let mu0 = -20.0;
        let (rho, _) = mean_occupation(&t, mu0);
        let mt = tilted_potential(&t, rho * 32.0).unwrap();
        assert!((mt - mu0).abs() < 1e-9);
        let (i, _) = rate_function(&t, rho, mu0).unwrap();
        assert!(i.abs() < 1e-12);
        assert!(tilted_potential(&t, 0.0).is_err());
        assert!(tilted_potential(&t, 32.0).is_err());
    }

    #[test]
    fn ideal_variance() {
        let fe = CanonicalFreeEnergy::ideal();
        let vt = variance_terms(0.2, Ratio::new(1, 2), 0.5, 100, &fe, 0.2f64.ln()).unwrap();
        assert!((vt.d - 0.2).abs() < 1e-14);
        assert_eq!(vt.d, vt.d_alpha);
        assert_eq!(vt.d, vt.d_alpha_plus);
        assert!(vt.e.is_finite() && vt.e > 0.0);
    }

    #[test]
    fn decomposition_two_sites() {
        let t = l2(0.4);
        let (lj, lk) = appendix_objects(&t, -0.5, 1).unwrap();
        assert_eq!(lj[1], 0.0);
        let s: f64 = lj.iter().map(|x| x.exp()).sum();
        assert!((s * lk.exp() - 1.0).abs() < 1e-15);
        assert!(decomposition_error(&t, -0.5, &[0, 1, 2]).unwrap() < 1e-14);
    }
}
