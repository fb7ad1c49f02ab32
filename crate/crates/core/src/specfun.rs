//! Closed-form p-gamma and p-psi functions.
//!
//! For `p ∈ ℕ` and `x > 0`:
//!
//! ```text
//! Γ_p(x) = p! p^x / (x (x+1) ⋯ (x+p))
//! ψ_p(x) = ln p − Σ_{k=0}^{p} 1/(x+k)
//! ```
//!
//! plus classical digamma / log-gamma reference routines used as limit oracles.

use crate::error::{positive, Error, Result};
use crate::sum::{compensated_sum, CompensatedSum};

/// Largest supported derivative order.
pub const N_MAX: usize = 30;

/// Positive integer index `p` of the `Γ_p` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PIndex(u64);

impl PIndex {
    pub fn new(p: u64) -> Result<Self> {
        if p == 0 {
            return Err(Error::Argument("p must be a positive integer".into()));
        }
        Ok(PIndex(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl TryFrom<u64> for PIndex {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        PIndex::new(p)
    }
}

impl std::fmt::Display for PIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

pub(crate) fn check_order(n: usize) -> Result<usize> {
    if n > N_MAX {
        Err(Error::Order { order: n, max: N_MAX })
    } else {
        Ok(n)
    }
}

/// `n!` as a double. Exact for `n ≤ 22`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `ln Γ_p(x)`.
///
/// Evaluated from the product form `p^x / (x (1 + x/1) ⋯ (1 + x/p))`.
pub fn ln_gamma_p(p: PIndex, x: f64) -> Result<f64> {
    let x = positive("x", x)?;
    let mut acc = CompensatedSum::new();
    acc += x * p.as_f64().ln();
    acc += -x.ln();
    for k in 1..=p.get() {
        acc += -(x / k as f64).ln_1p();
    }
    Ok(acc.value())
}

/// `Γ_p(x) = exp(ln Γ_p(x))`. Overflows to `+∞` only for extreme inputs
/// (e.g. `x` very close to zero); that is not treated as an error.
pub fn gamma_p(p: PIndex, x: f64) -> Result<f64> {
    ln_gamma_p(p, x).map(f64::exp)
}

/// `ψ_p(x) = ln p − Σ_{k=0}^{p} 1/(x+k)` with compensated summation.
pub fn psi_p(p: PIndex, x: f64) -> Result<f64> {
    let x = positive("x", x)?;
    let mut acc = CompensatedSum::new();
    acc += p.as_f64().ln();
    for k in 0..=p.get() {
        acc += -1.0 / (x + k as f64);
    }
    Ok(acc.value())
}

/// `ψ_p^{(n)}(x) = (−1)^{n+1} n! Σ_{k=0}^{p} (x+k)^{−(n+1)}` for `1 ≤ n ≤ N_MAX`.
pub fn psi_p_nth(p: PIndex, n: usize, x: f64) -> Result<f64> {
    let x = positive("x", x)?;
    check_order(n)?;
    if n == 0 {
        return Err(Error::Argument(
            "psi_p_nth requires n >= 1; use psi_p for n = 0".into(),
        ));
    }
    let power = (n + 1) as i32;
    let s = compensated_sum((0..=p.get()).map(|k| (x + k as f64).powi(-power)));
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign * factorial(n) * s)
}

// Asymptotic shift target for the classical reference routines.
const ASYMPTOTIC_MIN: f64 = 10.0;

/// Classical digamma `ψ(x)` for `x > 0`.
///
/// Upward recurrence `ψ(x) = ψ(x+1) − 1/x` to reach `x ≥ 10`, then the
/// asymptotic expansion in Bernoulli numbers through the `x^{-12}` term.
pub fn digamma_ref(x: f64) -> Result<f64> {
    let mut x = positive("x", x)?;
    let mut acc = CompensatedSum::new();
    while x < ASYMPTOTIC_MIN {
        acc += -1.0 / x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let tail = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0 - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32760.0))))));
    acc += x.ln();
    acc += -0.5 / x;
    acc += -tail;
    Ok(acc.value())
}

/// Classical `ln Γ(x)` for `x > 0` (shift to `x ≥ 10`, then Stirling series).
pub fn ln_gamma_ref(x: f64) -> Result<f64> {
    let mut x = positive("x", x)?;
    let mut shift = 1.0;
    while x < ASYMPTOTIC_MIN {
        shift *= x;
        x += 1.0;
    }
    let r = 1.0 / (x * x);
    let series = (1.0 / x)
        * (1.0 / 12.0
            - r * (1.0 / 360.0
                - r * (1.0 / 1260.0 - r * (1.0 / 1680.0 - r * (1.0 / 1188.0 - r * (691.0 / 360360.0))))));
    let half_ln_two_pi = 0.918_938_533_204_672_8;
    Ok((x - 0.5) * x.ln() - x + half_ln_two_pi + series - shift.ln())
}
