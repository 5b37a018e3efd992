//! Non-negative floats with an unbounded binary exponent.
//!
//! Transfer-matrix coefficients reach `e^{O(L)}` and underflow/overflow `f64`
//! long before L = 4096. All arithmetic here is on sums of positive terms, so
//! a 53-bit mantissa is enough; only the exponent range needs extending.

use std::ops::{Add, AddAssign, Mul};

/// `m · 2^e` with `m ∈ [1, 2)` or `m == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XFloat {
    m: f64,
    e: i64,
}

impl XFloat {
    pub const ZERO: XFloat = XFloat { m: 0.0, e: 0 };
    pub const ONE: XFloat = XFloat { m: 1.0, e: 0 };

    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "XFloat holds finite non-negatives");
        XFloat { m: x, e: 0 }.norm()
    }

    /// Builds `exp(x)`.
    pub fn exp(x: f64) -> Self {
        if x == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let k = (x / std::f64::consts::LN_2).floor();
        let r = x - k * std::f64::consts::LN_2;
        XFloat { m: r.exp(), e: k as i64 }.norm()
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0.0
    }

    fn norm(self) -> Self {
        if self.m == 0.0 {
            return Self::ZERO;
        }
        let bits = self.m.to_bits();
        let raw = ((bits >> 52) & 0x7ff) as i64;
        if raw == 0 {
            // subnormal: rescale into the normal range first
            let s = XFloat { m: self.m * 2f64.powi(64), e: self.e - 64 };
            return s.norm();
        }
        let shift = raw - 1023;
        let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
        XFloat { m, e: self.e + shift }
    }

    /// Natural log; `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.m == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.m.ln() + self.e as f64 * std::f64::consts::LN_2
        }
    }

    /// Lossy conversion (may overflow to `inf` or underflow to 0).
    pub fn to_f64(&self) -> f64 {
        if self.e > 1100 {
            return f64::INFINITY;
        }
        if self.e < -1100 {
            return 0.0;
        }
        self.m * 2f64.powi(self.e as i32)
    }
}

impl Add for XFloat {
    type Output = XFloat;
    fn add(self, o: XFloat) -> XFloat {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let diff = hi.e - lo.e;
        if diff > 60 {
            return hi;
        }
        XFloat { m: hi.m + lo.m * 2f64.powi(-(diff as i32)), e: hi.e }.norm()
    }
}

impl AddAssign for XFloat {
    fn add_assign(&mut self, o: XFloat) {
        *self = *self + o;
    }
}

impl Mul for XFloat {
    type Output = XFloat;
    fn mul(self, o: XFloat) -> XFloat {
        if self.m == 0.0 || o.m == 0.0 {
            return Self::ZERO;
        }
        XFloat { m: self.m * o.m, e: self.e + o.e }.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_small() {
        for &x in &[1e-300, 0.1, 1.0, 3.5, 1e300] {
            let v = XFloat::from_f64(x);
            assert!((v.to_f64() - x).abs() <= 1e-15 * x);
            assert!((v.ln() - x.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_exponents() {
        let a = XFloat::exp(5000.0);
        let b = XFloat::exp(5000.0 + 2f64.ln());
        let s = a + a;
        assert!((s.ln() - b.ln()).abs() < 1e-12);
        let p = a * a;
        assert!((p.ln() - 10000.0).abs() < 1e-9);
        assert!(XFloat::exp(-5000.0).ln() + 5000.0 < 1e-9);
    }

    #[test]
    fn zero_behaviour() {
        let z = XFloat::ZERO;
        assert!(z.is_zero());
        assert_eq!((z + XFloat::ONE).to_f64(), 1.0);
        assert!((z * XFloat::ONE).is_zero());
        assert_eq!(z.ln(), f64::NEG_INFINITY);
    }
}
