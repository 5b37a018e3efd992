//! The two-point truncated-correlation bound at fixed N on the torus.

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::lattice::{LatticeSpec, Potential};
use crate::oracle::{self, CorrelationTable};
use crate::{Error, Result};

/// Step of the calibration grid for (C, C1).
pub const GRID_STEP: f64 = 1.0 / 64.0;
/// Cap of the calibration grid.
pub const GRID_CAP: f64 = 64.0;

/// Right side of the bound for a pair at torus distance `dist`:
/// ρ²[s + s/N + C e^{−r}] + C1/|Λ| with s = (e^{βε}−1)·1_{r=1} + 1_{r=0}.
pub fn bound_rhs(dist: f64, n: usize, volume: usize, beta: f64, pot: &Potential, c: f64, c1: f64) -> f64 {
    let rho = n as f64 / volume as f64;
    let nn = if dist == 1.0 { (beta * pot.depth()).exp_m1() } else { 0.0 };
    let same = if dist == 0.0 { 1.0 } else { 0.0 };
    let s = nn + same;
    rho * rho * (s + s / n as f64 + c * (-dist).exp()) + c1 / volume as f64
}

/// One member of a calibration family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCase {
    pub lattice: LatticeSpec,
    pub pot: Potential,
    pub beta: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub q1: usize,
    pub q2: usize,
    pub dist: f64,
    pub u2: f64,
    pub rhs: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationBoundReport {
    pub case: CorrelationCase,
    pub c: f64,
    pub c1: f64,
    pub rows: Vec<PairRow>,
    /// Fitted decay rate of |u²(r)| (None if fewer than two usable points).
    pub decay_rate: Option<f64>,
    /// N/|Λ| ≤ R_C/2.
    pub low_density: bool,
}

impl CorrelationBoundReport {
    pub fn all_feasible(&self) -> bool {
        self.rows.iter().all(|r| r.feasible)
    }
}

/// Calibrated constants with the case that pins them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c_min: f64,
    pub c1_min: f64,
    /// Index into the family of the case whose constraint binds C1 at C_min.
    pub binding_case: usize,
}

struct Constraint {
    case: usize,
    need: f64,
    c_coef: f64,
    inv_vol: f64,
}

fn constraints(idx: usize, case: &CorrelationCase, table: &CorrelationTable) -> Vec<Constraint> {
    let v = case.lattice.size();
    let rho = case.n as f64 / v as f64;
    let mut out = Vec::new();
    for q1 in 0..v {
        for q2 in 0..v {
            let r = case.lattice.distance(q1, q2);
            out.push(Constraint {
                case: idx,
                need: table.u2(q1, q2).abs() - bound_rhs(r, case.n, v, case.beta, &case.pot, 0.0, 0.0),
                c_coef: rho * rho * (-r).exp(),
                inv_vol: 1.0 / v as f64,
            });
        }
    }
    out
}

fn tables(family: &[CorrelationCase]) -> Result<Vec<CorrelationTable>> {
    family.iter().map(|c| oracle::exact_correlations(&c.lattice, &c.pot, c.beta, c.n)).collect()
}

/// Smallest (C, C1) on the k/64 grid (cap 64) with |u²| ≤ RHS for every pair
/// of every case; minimises C + C1, ties toward smaller C.
pub fn calibrate_constants(family: &[CorrelationCase]) -> Result<Calibration> {
    if family.is_empty() {
        return Err(Error::invalid("family", "needs at least one case"));
    }
    let tabs = tables(family)?;
    calibrate_from_tables(family, &tabs)
}

fn calibrate_from_tables(family: &[CorrelationCase], tabs: &[CorrelationTable]) -> Result<Calibration> {
    let cons: Vec<Constraint> = family.iter().zip(tabs).enumerate().flat_map(|(i, (c, t))| constraints(i, c, t)).collect();
    let kmax = (GRID_CAP / GRID_STEP) as usize;
    let mut best: Option<(f64, f64, usize)> = None;
    for kc in 0..=kmax {
        let c = kc as f64 * GRID_STEP;
        let mut c1_need = 0.0f64;
        let mut who = 0usize;
        for k in &cons {
            let need = (k.need - c * k.c_coef) / k.inv_vol;
            if need > c1_need {
                c1_need = need;
                who = k.case;
            }
        }
        let c1 = (c1_need / GRID_STEP).ceil() * GRID_STEP;
        if c1 > GRID_CAP {
            continue;
        }
        // re-verify on the grid value (ceil guarantees it, up to rounding)
        if cons.iter().any(|k| k.need > c * k.c_coef + c1 * k.inv_vol) {
            continue;
        }
        if best.is_none_or(|(bc, bc1, _)| c + c1 < bc + bc1) {
            best = Some((c, c1, who));
        }
    }
    match best {
        Some((c_min, c1_min, binding_case)) => Ok(Calibration { c_min, c1_min, binding_case }),
        None => Err(Error::Guard("no feasible (C, C1) within the calibration grid".into())),
    }
}

/// Least-squares slope of log|u²(0, r)| over r = 2..=L/2 on a periodic
/// chain; the rate is minus the slope (0 when the profile is flat).
pub fn decay_fit(table: &CorrelationTable) -> Result<Option<f64>> {
    let lat = &table.lattice;
    if lat.dim() != 1 || !lat.is_periodic() || lat.side() < 10 {
        return Err(Error::invalid("lattice", "decay fit needs a periodic chain with L >= 10"));
    }
    let pts: Vec<(f64, f64)> = (2..=lat.side() / 2)
        .filter_map(|r| {
            let u = table.u2(0, r).abs();
            // underflowed rows are dropped
            (u > 1e-300).then(|| (r as f64, u.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return Ok(None);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    Ok(Some(if slope.abs() < 1e-9 { 0.0 } else { -slope }))
}

/// Calibrates on the family and evaluates every pair of every case.
pub fn family_reports(family: &[CorrelationCase]) -> Result<(Calibration, Vec<CorrelationBoundReport>)> {
    let tabs = tables(family)?;
    let cal = calibrate_from_tables(family, &tabs)?;
    let mut reports = Vec::new();
    for (case, t) in family.iter().zip(&tabs) {
        let v = case.lattice.size();
        let mut rows = Vec::with_capacity(v * v);
        for q1 in 0..v {
            for q2 in 0..v {
                let dist = case.lattice.distance(q1, q2);
                let u2 = t.u2(q1, q2);
                let rhs = bound_rhs(dist, case.n, v, case.beta, &case.pot, cal.c_min, cal.c1_min);
                rows.push(PairRow { q1, q2, dist, u2, rhs, feasible: u2.abs() <= rhs });
            }
        }
        let rc = bounds::radius_canonical(case.lattice.dim(), &case.pot, case.beta)?.0;
        let decay_rate = if case.lattice.dim() == 1 && case.lattice.side() >= 10 { decay_fit(t)? } else { None };
        reports.push(CorrelationBoundReport {
            case: case.clone(),
            c: cal.c_min,
            c1: cal.c1_min,
            rows,
            decay_rate,
            low_density: (case.n as f64 / v as f64) <= rc / 2.0,
        });
    }
    Ok((cal, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    fn p() -> Potential {
        Potential::standard(1.0).unwrap()
    }

    #[test]
    fn rhs_structure() {
        let (n, v, beta) = (3, 12, 0.2);
        let rho2 = (3.0f64 / 12.0).powi(2);
        let same = bound_rhs(0.0, n, v, beta, &p(), 0.5, 2.0);
        assert!((same - (rho2 * (1.0 + 1.0 / 3.0 + 0.5) + 2.0 / 12.0)).abs() < 1e-15);
        let e = (0.8f64).exp_m1();
        let nn = bound_rhs(1.0, n, v, beta, &p(), 0.5, 0.0);
        assert!((nn - rho2 * (e * (1.0 + 1.0 / 3.0) + 0.5 * (-1f64).exp())).abs() < 1e-15);
        assert_eq!(bound_rhs(5.0, n, v, beta, &p(), 0.0, 0.0), 0.0);
    }

    #[test]
    fn feasible_and_monotone() {
        let case = CorrelationCase { lattice: LatticeSpec::chain(12, Boundary::Periodic).unwrap(), pot: p(), beta: 0.2, n: 2 };
        let cal = calibrate_constants(std::slice::from_ref(&case)).unwrap();
        let t = oracle::exact_correlations(&case.lattice, &case.pot, case.beta, case.n).unwrap();
        for &(dc, dc1) in &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (3.0, 5.0)] {
            for q in 0..12 {
                let r = case.lattice.distance(0, q);
                let rhs = bound_rhs(r, 2, 12, 0.2, &p(), cal.c_min + dc, cal.c1_min + dc1);
                assert!(t.u2(0, q).abs() <= rhs);
            }
        }
    }

    #[test]
    fn beta_zero_needs_no_c() {
        // without interaction |u²| is the without-replacement covariance
        let case = CorrelationCase { lattice: LatticeSpec::chain(10, Boundary::Periodic).unwrap(), pot: p(), beta: 0.0, n: 3 };
        let cal = calibrate_constants(&[case]).unwrap();
        assert_eq!(cal.c_min, 0.0);
    }
}
