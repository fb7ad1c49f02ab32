//! Minimal double-double arithmetic (unevaluated sum `hi + lo`).

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    DoubleDouble { hi: s, lo: err }
}

fn quick_two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    DoubleDouble {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_prod(a: f64, b: f64) -> DoubleDouble {
    let p = a * b;
    DoubleDouble {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl DoubleDouble {
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// `e^x − 1` for `|x| ≤ 1`, by Taylor series carried in double-double.
    pub fn exp_m1(x: f64) -> Self {
        debug_assert!(x.abs() <= 1.0);
        let x = DoubleDouble::from(x);
        let mut term = x;
        let mut sum = x;
        for k in 2..40 {
            term = term * x / DoubleDouble::from(k as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-34 * sum.hi.abs() {
                break;
            }
        }
        sum
    }
}

impl From<f64> for DoubleDouble {
    fn from(v: f64) -> Self {
        DoubleDouble { hi: v, lo: 0.0 }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let s = two_sum(self.hi, rhs.hi);
        let t = two_sum(self.lo, rhs.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let p = two_prod(self.hi, rhs.hi);
        let lo = p.lo + (self.hi * rhs.lo + self.lo * rhs.hi);
        quick_two_sum(p.hi, lo)
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * DoubleDouble::from(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * DoubleDouble::from(q2);
        let q3 = r.hi / rhs.hi;
        quick_two_sum(q1, q2) + DoubleDouble::from(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_third_times_three() {
        let third = DoubleDouble::from(1.0) / DoubleDouble::from(3.0);
        let back = third * DoubleDouble::from(3.0) - DoubleDouble::from(1.0);
        assert!(back.to_f64().abs() < 1e-31);
        assert!(third.lo != 0.0);
    }

    #[test]
    fn exp_m1_matches_libm_to_double_precision() {
        for &x in &[-1.0, -0.3, -1e-5, 1e-9, 0.25, 1.0] {
            let dd = DoubleDouble::exp_m1(x).to_f64();
            let libm = f64::exp_m1(x);
            assert!((dd - libm).abs() <= 2.0 * f64::EPSILON * libm.abs(), "x={x}");
        }
    }

    #[test]
    fn exp_m1_recovers_cancelled_digits() {
        // e^x − 1 − x − x²/2 for x = 0.1: exact value from 40-digit arithmetic
        let x = 0.1;
        let xd = DoubleDouble::from(x);
        let e = DoubleDouble::exp_m1(x) - xd - DoubleDouble::from(0.5) * xd * xd;
        let exact = 1.709_180_756_476_248_4e-4;
        assert!((e.to_f64() - exact).abs() < 1e-19);
    }
}
