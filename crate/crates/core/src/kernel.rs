//! The kernel `φ(t) = 1/(1 − e^{−t}) − 1/t`, its derivative, and the
//! Laplace density `g_p(t) = [1 − e^{−(p+1)t}] φ′(t) + (p+1) e^{−(p+1)t} φ(t)`
//! whose Laplace transform is `θ_{p,1}`.

use crate::ddouble::DoubleDouble;
use crate::error::{positive, Result};
use crate::specfun::PIndex;

/// Below this threshold `φ` and `φ′` are evaluated from their Bernoulli series.
pub const SERIES_THRESHOLD: f64 = 0.1;

/// Small-t branch of `φ`: `1/2 + t/12 − t³/720 + t⁵/30240 − t⁷/1209600`.
pub fn phi_series(t: f64) -> f64 {
    let t2 = t * t;
    0.5 + t * (1.0 / 12.0 - t2 * (1.0 / 720.0 - t2 * (1.0 / 30240.0 - t2 / 1_209_600.0)))
}

/// Direct branch of `φ`, with `1 − e^{−t}` taken from `expm1`.
pub fn phi_direct(t: f64) -> f64 {
    1.0 / -(-t).exp_m1() - 1.0 / t
}

/// Small-t branch of `φ′`: `1/12 − t²/240 + t⁴/6048 − t⁶/172800 + t⁸/5322240`.
pub fn phi_prime_series(t: f64) -> f64 {
    let t2 = t * t;
    1.0 / 12.0 - t2 * (1.0 / 240.0 - t2 * (1.0 / 6048.0 - t2 * (1.0 / 172_800.0 - t2 / 5_322_240.0)))
}

/// Direct branch of `φ′`: `1/t² − e^{−t}/(1 − e^{−t})²`.
///
/// Evaluated in double-double arithmetic for `t < 1`.
pub fn phi_prime_direct(t: f64) -> f64 {
    if t < 1.0 {
        let one = DoubleDouble::from(1.0);
        let t = DoubleDouble::from(t);
        let em1 = DoubleDouble::exp_m1(-t.hi);
        let q = (em1 + one) / (em1 * em1);
        (one / (t * t) - q).to_f64()
    } else {
        let s = (0.5 * t).sinh();
        1.0 / (t * t) - 0.25 / (s * s)
    }
}

/// `φ(t)` for `t > 0`. Increases from `1/2` (at `0+`) to `1` (at `∞`).
pub fn phi(t: f64) -> Result<f64> {
    let t = positive("t", t)?;
    Ok(if t < SERIES_THRESHOLD {
        phi_series(t)
    } else {
        phi_direct(t)
    })
}

/// `φ′(t)` for `t > 0`; tends to `1/12` at `0+` and decays like `1/t²`.
pub fn phi_prime(t: f64) -> Result<f64> {
    let t = positive("t", t)?;
    Ok(if t < SERIES_THRESHOLD {
        phi_prime_series(t)
    } else {
        phi_prime_direct(t)
    })
}

/// The density `g_p(t)`. Strictly positive on `(0, ∞)`; `g_p(0+) = (p+1)/2`.
pub fn bernstein_density(p: PIndex, t: f64) -> Result<f64> {
    let t = positive("t", t)?;
    let m = p.as_f64() + 1.0;
    let decay = (-m * t).exp();
    let rise = -(-m * t).exp_m1();
    Ok(rise * phi_prime(t)? + m * decay * phi(t)?)
}
