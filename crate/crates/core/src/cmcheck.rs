//! Complete-monotonicity scans: evaluate `(−1)^n f^{(n)}(x)` over an
//! `(n, x)` grid, cross-check derivative methods, and produce verdicts.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::quad::{laplace_moment, QuadratureSpec};
use crate::specfun::{check_order, psi_p_nth, PIndex};
use crate::theta::{theta_nth_scaled, Scaled, ThetaParams, ViolationWitness};

/// Highest order supported by [`fd_derivative`].
pub const FD_MAX_ORDER: usize = 4;

/// How a derivative value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    FiniteDifference,
    MomentIntegral,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::FiniteDifference => "finite-difference",
            Method::MomentIntegral => "moment-integral",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One derivative evaluation. `value` is the signed quantity `(−1)^n f^{(n)}(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivSample {
    pub n: usize,
    pub x: f64,
    pub value: f64,
    pub method: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyId {
    Theta { p: u64, alpha: f64 },
    PsiPPrime { p: u64 },
    Custom { name: String },
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyId::Theta { p, alpha } => write!(f, "theta(p={p}, alpha={alpha})"),
            FamilyId::PsiPPrime { p } => write!(f, "psi_p'(p={p})"),
            FamilyId::Custom { name } => write!(f, "custom({name})"),
        }
    }
}

type DerivFn = dyn Fn(usize, f64) -> Result<Scaled> + Send + Sync;
type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Laplace density `g` with `f(x) = ∫₀^∞ g(t) e^{−xt} dt` and `|g(t)| ≤ bound · t^power`.
#[derive(Clone)]
pub struct LaplaceDensity {
    pub density: Arc<DensityFn>,
    pub bound: f64,
    pub power: usize,
}

/// A function with a closed-form derivative evaluator and, optionally, a
/// Laplace density for the moment-integral route.
#[derive(Clone)]
pub struct FunctionFamily {
    pub id: FamilyId,
    derivative: Arc<DerivFn>,
    density: Option<LaplaceDensity>,
}

impl fmt::Debug for FunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionFamily")
            .field("id", &self.id)
            .field("has_density", &self.density.is_some())
            .finish()
    }
}

impl FunctionFamily {
    /// `θ_{p,α}`. The density route is available for `α = 1` only.
    pub fn theta(params: ThetaParams) -> Self {
        let density = (params.alpha == 1.0).then(|| {
            let p = params.p;
            LaplaceDensity {
                density: Arc::new(move |t| crate::kernel::bernstein_density(p, t).unwrap_or(f64::NAN)),
                bound: p.as_f64() + 1.1,
                power: 0,
            }
        });
        FunctionFamily {
            id: FamilyId::Theta {
                p: params.p.get(),
                alpha: params.alpha,
            },
            derivative: Arc::new(move |n, x| theta_nth_scaled(params, n, x)),
            density,
        }
    }

    /// `ψ′_p(x) = ∫₀^∞ t (1 − e^{−(p+1)t})/(1 − e^{−t}) e^{−xt} dt`.
    pub fn psi_p_prime(p: PIndex) -> Self {
        let m = p.as_f64() + 1.0;
        FunctionFamily {
            id: FamilyId::PsiPPrime { p: p.get() },
            derivative: Arc::new(move |n, x| {
                let value = psi_p_nth(p, n + 1, x)?;
                Ok(Scaled {
                    value,
                    scale: value.abs().max(1.0),
                })
            }),
            density: Some(LaplaceDensity {
                density: Arc::new(move |t| {
                    if t < 1e-6 {
                        t * (m - 0.5 * t * m * (m - 1.0))
                    } else {
                        t * (-m * t).exp_m1() / (-t).exp_m1()
                    }
                }),
                bound: m,
                power: 1,
            }),
        }
    }

    /// A user-supplied closed form `(n, x) ↦ f^{(n)}(x)`.
    pub fn custom<F>(name: impl Into<String>, derivative: F) -> Self
    where
        F: Fn(usize, f64) -> f64 + Send + Sync + 'static,
    {
        FunctionFamily {
            id: FamilyId::Custom { name: name.into() },
            derivative: Arc::new(move |n, x| {
                let value = derivative(n, x);
                Ok(Scaled {
                    value,
                    scale: value.abs().max(1.0),
                })
            }),
            density: None,
        }
    }

    pub fn with_density(mut self, density: LaplaceDensity) -> Self {
        self.density = Some(density);
        self
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }

    /// `f^{(n)}(x)` with the largest intermediate term magnitude.
    pub fn derivative(&self, n: usize, x: f64) -> Result<Scaled> {
        check_order(n)?;
        let x = positive("x", x)?;
        let s = (self.derivative)(n, x)?;
        if !s.value.is_finite() {
            return Err(Error::Argument(format!(
                "{} evaluated to {} at n = {n}, x = {x:e}",
                self.id, s.value
            )));
        }
        Ok(s)
    }

    /// `(−1)^n f^{(n)}(x)` with its tolerance scale.
    pub fn signed_derivative(&self, n: usize, x: f64) -> Result<Scaled> {
        let s = self.derivative(n, x)?;
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(Scaled {
            value: sign * s.value,
            scale: s.scale.max(s.value.abs()),
        })
    }

    /// `∫₀^∞ tⁿ g(t) e^{−xt} dt = (−1)^n f^{(n)}(x)`, if a density is attached.
    pub fn moment(&self, n: usize, x: f64, spec: &QuadratureSpec) -> Option<Result<f64>> {
        let d = self.density.as_ref()?;
        let g = d.density.clone();
        Some(laplace_moment(move |t| g(t), d.bound, d.power, n, x, spec))
    }

    /// `(−1)^n f^{(n)}(x)` by the requested method.
    pub fn signed_by(&self, method: Method, n: usize, x: f64, ctx: &MethodConfig) -> Result<f64> {
        match method {
            Method::ClosedForm => self.signed_derivative(n, x).map(|s| s.value),
            Method::FiniteDifference => {
                let f = |y: f64| self.derivative(0, y).map(|s| s.value);
                let d = fd_derivative(f, x, n, ctx.fd_step(n, x))?;
                Ok(if n.is_multiple_of(2) { d } else { -d })
            }
            Method::MomentIntegral => self
                .moment(n, x, &ctx.quadrature)
                .unwrap_or_else(|| Err(Error::Argument(format!("{} has no density", self.id)))),
        }
    }
}

/// Parameters for the non-closed-form derivative routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    /// Finite-difference base step at order `n` is `fd_rel_steps[n] · max(1, x)`.
    pub fd_rel_steps: [f64; FD_MAX_ORDER + 1],
    pub quadrature: QuadratureSpec,
}

/// Per-order relative FD steps, indexed by `n`.
pub const DEFAULT_FD_REL_STEPS: [f64; FD_MAX_ORDER + 1] = [0.01, 0.01, 0.02, 0.02, 0.035];

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            fd_rel_steps: DEFAULT_FD_REL_STEPS,
            quadrature: QuadratureSpec::default(),
        }
    }
}

impl MethodConfig {
    pub fn fd_step(&self, n: usize, x: f64) -> f64 {
        self.fd_rel_steps[n.min(FD_MAX_ORDER)] * x.max(1.0)
    }
}

fn central_difference<F>(f: &F, x: f64, n: usize, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let at = |k: f64| f(x + k * h);
    Ok(match n {
        0 => f(x)?,
        1 => (at(1.0)? - at(-1.0)?) / (2.0 * h),
        2 => (at(1.0)? - 2.0 * f(x)? + at(-1.0)?) / (h * h),
        3 => (at(2.0)? - 2.0 * at(1.0)? + 2.0 * at(-1.0)? - at(-2.0)?) / (2.0 * h * h * h),
        4 => (at(2.0)? - 4.0 * at(1.0)? + 6.0 * f(x)? - 4.0 * at(-1.0)? + at(-2.0)?) / (h * h * h * h),
        _ => unreachable!("order checked by caller"),
    })
}

/// `f^{(n)}(x)` for `n ≤ 4` from second-order central differences at steps
/// `h0`, `h0/2`, `h0/4`, combined by two levels of Richardson extrapolation.
pub fn fd_derivative<F>(f: F, x: f64, n: usize, h0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if n > FD_MAX_ORDER {
        return Err(Error::Order {
            order: n,
            max: FD_MAX_ORDER,
        });
    }
    let h0 = positive("h0", h0)?;
    let lower = x - n as f64 * h0;
    if !(lower > 0.0) {
        return Err(Error::StepCollapse { lower });
    }
    if n == 0 {
        return f(x);
    }
    let d0 = central_difference(&f, x, n, h0)?;
    let d1 = central_difference(&f, x, n, h0 / 2.0)?;
    let d2 = central_difference(&f, x, n, h0 / 4.0)?;
    let r0 = (4.0 * d1 - d0) / 3.0;
    let r1 = (4.0 * d2 - d1) / 3.0;
    Ok((16.0 * r1 - r0) / 15.0)
}

/// Logarithmically spaced points on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        LogGrid {
            lo: 0.01,
            hi: 100.0,
            points: 64,
        }
    }
}

impl LogGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        let g = LogGrid { lo, hi, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        positive("x_min", self.lo)?;
        positive("x_max", self.hi)?;
        if self.hi < self.lo || self.points == 0 || (self.points == 1 && self.hi != self.lo) {
            return Err(Error::Argument(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| match i {
                0 => self.lo,
                i if i + 1 == self.points => self.hi,
                i => (a + (b - a) * i as f64 / last).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderMinimum {
    pub n: usize,
    pub min_value: f64,
    pub argmin_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMScanReport {
    pub family: FamilyId,
    pub grid: LogGrid,
    pub max_order: usize,
    /// A sample violates iff `value < −tolerance · scale`.
    pub tolerance: f64,
    pub per_order: Vec<OrderMinimum>,
    pub verdict: Verdict,
    pub witness: Option<ViolationWitness>,
    #[serde(skip)]
    pub samples: Vec<DerivSample>,
    #[serde(skip)]
    pub scales: Vec<f64>,
}

impl CMScanReport {
    /// Smallest signed value over all orders.
    pub fn min_value(&self) -> f64 {
        self.per_order
            .iter()
            .map(|o| o.min_value)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates `(−1)^n f^{(n)}(x)` for `n = 0..=max_order` and every grid point.
///
/// The verdict is `Violated` iff some sample has `value < −tol · scale`, where
/// `scale` is the largest term magnitude reported by the evaluator; the
/// witness is the first such sample in `(n, x)` order.
pub fn cm_scan(family: &FunctionFamily, grid: &LogGrid, max_order: usize, tol: f64) -> Result<CMScanReport> {
    grid.validate()?;
    check_order(max_order)?;
    if !(tol >= 0.0) {
        return Err(Error::Argument(format!("tolerance must be >= 0, got {tol}")));
    }
    let xs = grid.points();
    let keys: Vec<(usize, f64)> = (0..=max_order)
        .flat_map(|n| xs.iter().map(move |&x| (n, x)))
        .collect();
    let evaluated: Vec<Result<Scaled>> = keys
        .par_iter()
        .map(|&(n, x)| {
            family.signed_derivative(n, x).map_err(|e| Error::Evaluation {
                n,
                x,
                source: Box::new(e),
            })
        })
        .collect();

    let mut samples = Vec::with_capacity(keys.len());
    let mut scales = Vec::with_capacity(keys.len());
    for (&(n, x), r) in keys.iter().zip(evaluated) {
        let s = r?;
        samples.push(DerivSample {
            n,
            x,
            value: s.value,
            method: Method::ClosedForm,
        });
        scales.push(s.scale);
    }

    let per_order = (0..=max_order)
        .map(|n| {
            samples.iter().filter(|s| s.n == n).fold(
                OrderMinimum {
                    n,
                    min_value: f64::INFINITY,
                    argmin_x: f64::NAN,
                },
                |m, s| {
                    if s.value < m.min_value {
                        OrderMinimum {
                            n,
                            min_value: s.value,
                            argmin_x: s.x,
                        }
                    } else {
                        m
                    }
                },
            )
        })
        .collect();

    let witness = samples
        .iter()
        .zip(&scales)
        .find(|(s, &scale)| s.value < -tol * scale)
        .map(|(s, _)| ViolationWitness {
            n: s.n,
            x: s.x,
            value: s.value,
        });

    Ok(CMScanReport {
        family: family.id.clone(),
        grid: *grid,
        max_order,
        tolerance: tol,
        per_order,
        verdict: if witness.is_some() {
            Verdict::Violated
        } else {
            Verdict::Consistent
        },
        witness,
        samples,
        scales,
    })
}

/// Largest disagreement between two methods at one derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub n: usize,
    pub method_a: Method,
    pub method_b: Method,
    /// `max |a − b|`
    pub max_abs: f64,
    /// `max |a − b| / (1 + |a|)`
    pub max_scaled: f64,
    pub worst_x: f64,
}

/// The methods a family supports at order `n`.
pub fn available_methods(family: &FunctionFamily, n: usize) -> Vec<Method> {
    let mut m = vec![Method::ClosedForm];
    if n <= FD_MAX_ORDER {
        m.push(Method::FiniteDifference);
    }
    if family.has_density() {
        m.push(Method::MomentIntegral);
    }
    m
}

/// For every order in `orders` and every pair of available methods, the
/// largest disagreement in `(−1)^n f^{(n)}(x)` over the grid.
pub fn cross_validate(
    family: &FunctionFamily,
    grid: &LogGrid,
    orders: std::ops::RangeInclusive<usize>,
    config: &MethodConfig,
) -> Result<Vec<Discrepancy>> {
    grid.validate()?;
    let xs = grid.points();
    let mut out = Vec::new();
    for n in orders {
        check_order(n)?;
        let methods = available_methods(family, n);
        if methods.len() < 2 {
            continue;
        }
        let table: Vec<Vec<f64>> = methods
            .iter()
            .map(|&m| {
                xs.par_iter()
                    .map(|&x| {
                        family.signed_by(m, n, x, config).map_err(|e| Error::Evaluation {
                            n,
                            x,
                            source: Box::new(e),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        for i in 0..methods.len() {
            for j in i + 1..methods.len() {
                let mut d = Discrepancy {
                    n,
                    method_a: methods[i],
                    method_b: methods[j],
                    max_abs: 0.0,
                    max_scaled: 0.0,
                    worst_x: xs[0],
                };
                for (k, &x) in xs.iter().enumerate() {
                    let (a, b) = (table[i][k], table[j][k]);
                    let abs = (a - b).abs();
                    if abs > d.max_abs {
                        d.max_abs = abs;
                        d.worst_x = x;
                    }
                    d.max_scaled = d.max_scaled.max(abs / (1.0 + a.abs()));
                }
                out.push(d);
            }
        }
    }
    Ok(out)
}
