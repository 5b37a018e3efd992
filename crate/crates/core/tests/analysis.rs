//! Deviation and correlation invariants against exact tables.

use canonical_cluster::correlation::{self, CorrelationCase};
use canonical_cluster::deviation::{self, DeviationSpec};
use canonical_cluster::lattice::{Boundary, LatticeSpec, Potential};
use canonical_cluster::oracle::{self, CanonicalTable};
use canonical_cluster::series::{self, CanonicalFreeEnergy};
use canonical_cluster::{bounds, logsumexp};
use num_rational::Ratio;

const BETA: f64 = 0.1;

fn unit() -> Potential {
    Potential::standard(1.0).unwrap()
}

fn mu0() -> f64 {
    bounds::lattice_gas_threshold(1, &unit(), BETA).unwrap() - 1.0
}

fn chain(l: usize) -> CanonicalTable {
    oracle::transfer_matrix_table(l, &unit(), BETA, Boundary::Zero).unwrap()
}

// ---------------------------------------------------------------- deviation

#[test]
fn mean_is_pressure_derivative() {
    let t = chain(64);
    let h = 1e-4;
    let p = |mu: f64| oracle::grand_canonical_eval(&t, mu).pressure(BETA);
    let fd = (p(mu0() + h) - p(mu0() - h)) / (2.0 * h);
    let (rho, _) = deviation::mean_occupation(&t, mu0());
    assert!((fd - rho).abs() < 1e-6, "{fd} vs {rho}");
}

#[test]
fn very_negative_mu_empties_the_box() {
    let t = chain(32);
    let (rho, nbar) = deviation::mean_occupation(&t, -1e4);
    assert!(rho < 1e-100 && nbar == 0);
    assert_eq!(deviation::find_n_star(&t, -1e4), 0);
}

#[test]
fn mean_and_mode_stay_close_along_ladder() {
    for l in [16usize, 32, 64, 128, 256] {
        let t = chain(l);
        let (_, nbar) = deviation::mean_occupation(&t, mu0());
        let ns = deviation::find_n_star(&t, mu0());
        assert!((nbar as i64 - ns as i64).abs() <= 3, "L={l}: N̄={nbar} N*={ns}");
    }
}

#[test]
fn tilted_mean_reproduces_target() {
    let t = chain(128);
    let mut prev = f64::NEG_INFINITY;
    for n in [3usize, 10, 20, 40, 64, 100] {
        let mt = deviation::tilted_potential(&t, n as f64).unwrap();
        let back = oracle::grand_canonical_eval(&t, mt).density() * 128.0;
        assert!((back - n as f64).abs() < 1e-8, "Ñ={n}: {back}");
        assert!(mt > prev);
        prev = mt;
    }
}

#[test]
fn rate_function_is_nonnegative_with_unique_zero() {
    let t = chain(64);
    let (rho_bar, _) = deviation::mean_occupation(&t, mu0());
    for k in 1..64 {
        let rho = k as f64 / 64.0;
        let (i, _) = deviation::rate_function(&t, rho, mu0()).unwrap();
        assert!(i >= -1e-14, "ρ̃={rho}: I={i}");
        if (rho - rho_bar).abs() > 1.0 / 64.0 {
            assert!(i > 0.0);
        }
    }
    let (i0, _) = deviation::rate_function(&t, rho_bar, mu0()).unwrap();
    assert!(i0.abs() < 1e-14);
}

#[test]
fn rate_curvature_is_inverse_variance() {
    // I''(ρ̄) = β dμ̃/dρ̃ = |Λ|/Var(N) under μ0
    let t = chain(64);
    let v = 64.0;
    let (rho_bar, _) = deviation::mean_occupation(&t, mu0());
    let h = 1e-3;
    let i = |r: f64| deviation::rate_function(&t, r, mu0()).unwrap().0;
    let fd = (i(rho_bar + h) - 2.0 * i(rho_bar) + i(rho_bar - h)) / (h * h);
    let g = oracle::grand_canonical_eval(&t, mu0());
    let mean: f64 = g.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let var: f64 = g.probs.iter().enumerate().map(|(n, p)| (n as f64 - mean).powi(2) * p).sum();
    assert!((fd - v / var).abs() <= 1e-4 * (v / var), "{fd} vs {}", v / var);
}

#[test]
fn chemical_potential_identity_is_small() {
    // βμ0 − βℱ'(ρ*) is the discreteness of N* plus the Stirling slope, O(log|Λ|/|Λ|)
    for l in [64usize, 128, 256] {
        let t = chain(l);
        let v = l as f64;
        let ns = deviation::find_n_star(&t, mu0());
        let b = series::extract_b_lambda(&t, deviation::FREE_ENERGY_ORDER).unwrap();
        let fe = CanonicalFreeEnergy::finite_volume(l, b);
        let gap = (BETA * mu0() - fe.beta_f(ns as f64 / v, 1).unwrap()).abs();
        let rho = ns as f64 / v;
        assert!(gap <= 2.0 / (rho * v) + v.ln() / v, "L={l}: gap {gap}");
    }
}

#[test]
fn zero_deviation_matches_gaussian_peak() {
    let t = chain(256);
    let r = deviation::formula_probability(&DeviationSpec::new(mu0(), Ratio::new(1, 2), 0.0).unwrap(), &t).unwrap();
    assert_eq!(r.n_tilde, r.n_star);
    assert_eq!(r.u_prime, 0.0);
    assert!((r.p_formula - 1.0 / (2.0 * std::f64::consts::PI * r.d * 256.0).sqrt()).abs() < 1e-15);
    assert!(r.gap < 0.5, "gap {}", r.gap);
}

#[test]
fn moderate_deviation_terms_are_positive() {
    let t = chain(256);
    for (p, q) in [(1, 2), (2, 3), (3, 4)] {
        let r = deviation::formula_probability(&DeviationSpec::new(mu0(), Ratio::new(p, q), 0.1).unwrap(), &t).unwrap();
        assert!(r.d > 0.0 && r.d_alpha_plus > 0.0 && r.e.is_finite(), "α={p}/{q}: {r:?}");
        assert_eq!(r.m_alpha, deviation::m_alpha(Ratio::new(p, q)).unwrap());
        assert!((r.u_prime * (256f64).powf(p as f64 / q as f64)).fract().abs() < 1e-9);
    }
    // far beyond the density scale the tail envelope is unbounded, not truncated
    let r = deviation::formula_probability(&DeviationSpec::new(mu0(), Ratio::new(3, 4), 0.5).unwrap(), &t).unwrap();
    assert_eq!(r.e, f64::INFINITY);
}

#[test]
fn large_deviation_gap_is_bounded() {
    for l in [64usize, 128] {
        let r = deviation::formula_probability(&DeviationSpec::new(mu0(), Ratio::from_integer(1), 0.05).unwrap(), &chain(l)).unwrap();
        assert!(r.i_gc > 0.0);
        assert!(r.log_gap().abs() < 0.05, "L={l}: {}", r.log_gap());
    }
}

#[test]
fn decomposition_holds_for_every_anchor() {
    let t = chain(64);
    let anchors: Vec<usize> = (0..=64).collect();
    assert!(deviation::decomposition_error(&t, mu0(), &anchors).unwrap() < 1e-12);
    let (lj, lk) = deviation::appendix_objects(&t, mu0(), 5).unwrap();
    let total: f64 = logsumexp(&lj) + lk;
    assert!(total.abs() < 1e-13);
}

#[test]
fn out_of_range_deviation_is_refused() {
    let t = chain(64);
    assert!(DeviationSpec::new(mu0(), Ratio::new(1, 3), 1.0).is_err());
    assert!(deviation::formula_probability(&DeviationSpec::new(mu0(), Ratio::from_integer(1), 2.0).unwrap(), &t).is_err());
}

// ---------------------------------------------------------------- correlations

fn case(l: usize, n: usize, beta: f64) -> CorrelationCase {
    CorrelationCase { lattice: LatticeSpec::chain(l, Boundary::Periodic).unwrap(), pot: unit(), beta, n }
}

#[test]
fn correlation_symmetry_and_sum_rule() {
    for (l, n, beta) in [(10, 2, 0.2), (12, 3, 0.1), (9, 4, 0.5)] {
        let c = case(l, n, beta);
        let t = oracle::exact_correlations(&c.lattice, &c.pot, beta, n).unwrap();
        for q1 in 0..l {
            let s: f64 = (0..l).map(|q2| t.rho2(q1, q2)).sum();
            assert!((s - (n as f64 - 1.0) * t.rho1[q1]).abs() < 1e-13);
            assert!((t.rho1[q1] - n as f64 / l as f64).abs() < 1e-13);
            for q2 in 0..l {
                assert!((t.u2(q1, q2) - t.u2(q2, q1)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn zero_beta_correlation_is_sampling_covariance() {
    // without replacement: ρ² = N(N−1)/(V(V−1)) off the diagonal
    let (l, n) = (10usize, 3usize);
    let c = case(l, n, 0.0);
    let t = oracle::exact_correlations(&c.lattice, &c.pot, 0.0, n).unwrap();
    let (nf, v) = (n as f64, l as f64);
    let off = nf * (nf - 1.0) / (v * (v - 1.0)) - (nf / v).powi(2);
    for q in 1..l {
        assert!((t.u2(0, q) - off).abs() < 1e-15);
    }
    let rep = correlation::decay_fit(&t).unwrap();
    assert_eq!(rep, Some(0.0));
}

#[test]
fn calibrated_constants_cover_the_family() {
    let fam: Vec<CorrelationCase> = [(10, 2, 0.2), (12, 2, 0.1)].iter().map(|&(l, n, b)| case(l, n, b)).collect();
    let (cal, reports) = correlation::family_reports(&fam).unwrap();
    assert!(reports.iter().all(|r| r.all_feasible()));
    assert!(cal.c_min <= correlation::GRID_CAP && cal.c1_min <= correlation::GRID_CAP);
    // one grid step less on C1 breaks some pair
    let tight = fam.iter().any(|c| {
        let t = oracle::exact_correlations(&c.lattice, &c.pot, c.beta, c.n).unwrap();
        let v = c.lattice.size();
        (0..v).any(|q| {
            let r = c.lattice.distance(0, q);
            t.u2(0, q).abs() > correlation::bound_rhs(r, c.n, v, c.beta, &c.pot, cal.c_min, cal.c1_min - correlation::GRID_STEP)
        })
    });
    assert!(tight || cal.c1_min == 0.0);
}
