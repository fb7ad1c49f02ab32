//! `θ_{p,α}(x) = x^α [ln(px/(x+p+1)) − ψ_p(x)]` and its exact derivatives.
//!
//! The bracket `B_p(x) = ln(px/(x+p+1)) − ψ_p(x)` telescopes into
//!
//! ```text
//! B_p(x) = Σ_{k=0}^{p} [u_k − ln(1 + u_k)],   u_k = 1/(x+k)
//! ```
//!
//! and its derivatives into `(−1)^n (n−1)! Σ_k D_n(x+k)` with
//! `D_n(a) = n/a^{n+1} − (a^{−n} − (a+1)^{−n}) > 0`. Every summand is positive.

use crate::error::{positive, Error, Result};
use crate::specfun::{check_order, factorial, PIndex};
use crate::sum::compensated_sum;

/// Parameters `(p, α)` of `θ_{p,α}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaParams {
    pub p: PIndex,
    pub alpha: f64,
}

impl ThetaParams {
    pub fn new(p: PIndex, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Argument(format!("alpha must be finite, got {alpha}")));
        }
        Ok(ThetaParams { p, alpha })
    }
}

/// A point where `(−1)^n θ^{(n)}(x)` is negative.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ViolationWitness {
    pub n: usize,
    pub x: f64,
    /// The signed quantity `(−1)^n θ^{(n)}(x)`.
    pub value: f64,
}

/// A derivative value together with the largest term magnitude that went into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub value: f64,
    pub scale: f64,
}

// u − ln(1+u) for u > 0.
fn log1p_gap(u: f64) -> f64 {
    if u > 0.1 {
        return u - u.ln_1p();
    }
    // u²/2 − u³/3 + u⁴/4 − …
    let mut sum = 0.0;
    let mut pow = u * u;
    for j in 2..60 {
        let term = pow / j as f64;
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        if term < 1e-18 * sum {
            break;
        }
        pow *= u;
    }
    sum
}

// D_n(a) = n/a^{n+1} − (a^{−n} − (a+1)^{−n}) for n ≥ 1.
fn leibniz_gap(n: usize, a: f64) -> f64 {
    let nf = n as f64;
    if a >= 4.0 * (nf + 1.0) {
        // a^{−n} Σ_{j≥2} (−1)^j C(n+j−1, j) a^{−j}
        let u = 1.0 / a;
        let mut coef = nf * (nf + 1.0) / 2.0;
        let mut pow = u * u;
        let mut sum = 0.0;
        for j in 2..200 {
            let term = coef * pow;
            if j % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            if term < 1e-18 * sum {
                break;
            }
            coef *= (nf + j as f64) / (j as f64 + 1.0);
            pow *= u;
        }
        a.powi(-(n as i32)) * sum
    } else {
        let ni = n as i32;
        nf * a.powi(-ni - 1) - a.powi(-ni) + (a + 1.0).powi(-ni)
    }
}

/// `ln(px/(x+p+1)) − ψ_p(x)`, strictly positive for `x > 0`.
pub fn bracket(p: PIndex, x: f64) -> Result<f64> {
    let x = positive("x", x)?;
    Ok(compensated_sum(
        (0..=p.get()).map(|k| log1p_gap(1.0 / (x + k as f64))),
    ))
}

/// `d^n/dx^n` of [`bracket`] for `1 ≤ n ≤ N_MAX`, equal to
/// `(−1)^{n−1}(n−1)! [x^{−n} − (x+p+1)^{−n}] − ψ_p^{(n)}(x)`.
pub fn bracket_nth(p: PIndex, n: usize, x: f64) -> Result<f64> {
    let x = positive("x", x)?;
    check_order(n)?;
    if n == 0 {
        return bracket(p, x);
    }
    let s = compensated_sum((0..=p.get()).map(|k| leibniz_gap(n, x + k as f64)));
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * factorial(n - 1) * s)
}

/// `θ_{p,α}(x) = x^α · bracket(p, x)`.
pub fn theta(params: ThetaParams, x: f64) -> Result<f64> {
    Ok(x.powf(params.alpha) * bracket(params.p, x)?)
}

/// `θ_{p,α}^{(n)}(x)` by the general Leibniz rule on `x^α · bracket`.
pub fn theta_nth(params: ThetaParams, n: usize, x: f64) -> Result<f64> {
    theta_nth_scaled(params, n, x).map(|s| s.value)
}

/// As [`theta_nth`], also reporting the largest absolute Leibniz term.
pub fn theta_nth_scaled(params: ThetaParams, n: usize, x: f64) -> Result<Scaled> {
    let x = positive("x", x)?;
    check_order(n)?;
    let alpha = params.alpha;
    let mut terms = Vec::with_capacity(n + 1);
    // falling factorial α(α−1)⋯(α−i+1) and binomial C(n, i), built iteratively
    let mut falling = 1.0;
    let mut binom = 1.0;
    for i in 0..=n {
        if falling != 0.0 {
            let v = bracket_nth(params.p, n - i, x)?;
            terms.push(binom * falling * x.powf(alpha - i as f64) * v);
        }
        falling *= alpha - i as f64;
        binom *= (n - i) as f64 / (i + 1) as f64;
    }
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    Ok(Scaled {
        value: compensated_sum(terms),
        scale,
    })
}

/// `(x ψ′_p(x) − (p+1)/(x+p+1)) / bracket(p, x)`.
///
/// `θ′_{p,α}(x) ≤ 0` holds exactly when `α` does not exceed this ratio. The
/// numerator equals `−x · bracket′(x)` and is evaluated that way.
pub fn necessity_ratio(p: PIndex, x: f64) -> Result<f64> {
    let x = positive("x", x)?;
    Ok(-x * bracket_nth(p, 1, x)? / bracket(p, x)?)
}

/// Geometric search grid for [`find_cm_violation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViolationSearch {
    pub start: f64,
    pub factor: f64,
    pub x_min: f64,
    pub x_max: f64,
    /// A witness must satisfy `−θ′(x) < −tolerance`.
    pub tolerance: f64,
}

impl Default for ViolationSearch {
    fn default() -> Self {
        ViolationSearch {
            start: 1.0,
            factor: 2.0,
            x_min: 1e-9,
            x_max: 1e9,
            tolerance: 1e-9,
        }
    }
}

/// Searches for `x` with `θ′_{p,α}(x) > 0`, which exists for every `α > 1`.
///
/// Points are visited outward from `search.start`, alternating between
/// `start·factor^k` and `start/factor^k`, until one has
/// `necessity_ratio(p, x) < α` and `−θ′(x) < −tolerance`. Only `n = 1` is
/// examined. Returns `None` if both directions run past the caps.
pub fn find_cm_violation(params: ThetaParams, search: &ViolationSearch) -> Result<Option<ViolationWitness>> {
    if params.alpha <= 1.0 {
        return Err(Error::Argument(format!(
            "alpha = {} <= 1: theta is completely monotonic, no violation to find",
            params.alpha
        )));
    }
    if !(search.factor > 1.0) || !(search.x_min > 0.0) || !(search.x_max >= search.x_min) {
        return Err(Error::Argument("invalid violation search grid".into()));
    }
    let check = |x: f64| -> Result<Option<ViolationWitness>> {
        if necessity_ratio(params.p, x)? >= params.alpha {
            return Ok(None);
        }
        let value = -theta_nth(params, 1, x)?;
        Ok((value < -search.tolerance).then_some(ViolationWitness { n: 1, x, value }))
    };
    let mut up = search.start;
    let mut down = search.start / search.factor;
    loop {
        let up_ok = up <= search.x_max;
        let down_ok = down >= search.x_min;
        if !up_ok && !down_ok {
            return Ok(None);
        }
        if up_ok {
            if let Some(w) = check(up)? {
                return Ok(Some(w));
            }
            up *= search.factor;
        }
        if down_ok {
            if let Some(w) = check(down)? {
                return Ok(Some(w));
            }
            down /= search.factor;
        }
    }
}
