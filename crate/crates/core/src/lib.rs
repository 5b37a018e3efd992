//! Canonical cluster expansion for the Ising model seen as a lattice gas.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] — lattices, potentials, Hamiltonians and model constants.
//! * [`oracle`] — exact partition functions (enumeration, transfer matrix),
//!   grand-canonical probabilities and canonical correlations.
//! * [`graphs`] — labelled graph generators and classifiers.
//! * [`series`] — Mayer coefficients, finite-volume coefficients, the free
//!   energy and the virial series.
//! * [`bounds`] — closed-form convergence radii and thresholds.
//! * [`correlation`] — the two-point truncated-correlation bound.
//! * [`deviation`] — large/moderate deviation formulas against exact values.
//! * [`acceptance`] — the acceptance suite shared by tests and the CLI.
//!
//! Everything is deterministic; parallel reductions merge in a fixed order.

pub mod acceptance;
pub mod bounds;
pub mod correlation;
pub mod csv;
pub mod deviation;
pub mod graphs;
pub mod lattice;
pub mod oracle;
pub mod poly;
pub mod series;
pub mod xfloat;

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is out of its legal range.
    #[error("invalid {key}: {msg}")]
    Invalid { key: &'static str, msg: String },
    /// A size/order guard of an exact computation was violated.
    #[error("guard violated: {0}")]
    Guard(String),
}

impl Error {
    pub(crate) fn invalid(key: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid { key, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// `log(sum(exp(xs)))`, tolerant of `-inf` entries.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// `log n!`, summed exactly in floating point (n is small at desk scale).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `log C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_basic() {
        let v = logsumexp(&[0.0, 0.0]);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert_eq!(logsumexp(&[f64::NEG_INFINITY, 1.0]), 1.0);
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn factorials() {
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-14);
        assert!((ln_binomial(5, 2) - 10f64.ln()).abs() < 1e-14);
        assert_eq!(ln_binomial(2, 3), f64::NEG_INFINITY);
    }
}
