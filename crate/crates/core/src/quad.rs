//! Adaptive Gauss–Kronrod quadrature on `[0, ∞)` for Laplace-type integrands,
//! and the integral representations used to cross-check the closed forms.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{positive, Error, Result};
use crate::kernel::{bernstein_density, phi};
use crate::specfun::{check_order, ln_gamma_ref, PIndex};

/// Tolerances and truncation policy for semi-infinite integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Multiplier on the analytic truncation point.
    pub tail_safety: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_subdivisions: 2000,
            tail_safety: 1.5,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.rel_tol.is_finite()
            && self.abs_tol.is_finite()
            && self.max_subdivisions >= 10
            && self.tail_safety >= 1.0
            && self.tail_safety.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("invalid quadrature spec {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

/// Envelope `|f(t)| ≤ amplitude · e^{−rate·t}` for `t ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub amplitude: f64,
    pub rate: f64,
}

impl Envelope {
    pub fn new(amplitude: f64, rate: f64) -> Self {
        Envelope { amplitude, rate }
    }

    /// Envelope of `t^n e^{−xt}` (times a bound `b` on the remaining factor),
    /// using half the decay rate: `t^n e^{−xt/2} ≤ (2n/(e x))^n`.
    pub fn for_moment(n: usize, x: f64, b: f64) -> Self {
        let amplitude = if n == 0 {
            b
        } else {
            let nf = n as f64;
            b * (2.0 * nf / (std::f64::consts::E * x)).powf(nf)
        };
        Envelope {
            amplitude,
            rate: 0.5 * x,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// 15-point Kronrod rule with embedded 7-point Gauss rule on `[a, b]`.
/// The error estimate is rescaled as in QUADPACK and floored at `50·ε·∫|f|`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> Result<f64> {
        let v = f(t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Argument(format!(
                "integrand is not finite at t = {t}: {v}"
            )))
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = kronrod * half;
    let abs = abs * scale;
    let asc = asc * scale;
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs);
    }
    Ok(Panel { a, b, value, error })
}

/// Adaptive bisection on a finite interval `[a, b]`, always splitting the
/// panel with the largest error estimate.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    integrate_panels(&f, a, b, 0.0, spec)
}

fn integrate_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    extra_error: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Argument(format!("interval [{a}, {b}] is not finite")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: extra_error,
            subdivisions_used: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(gk15(f, a, b)?);
    let mut subdivisions = 0;
    loop {
        let (value, error) = totals(&heap);
        let error = error + extra_error;
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                error_estimate: error,
                subdivisions_used: subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = mid <= worst.a || mid >= worst.b;
        if subdivisions >= spec.max_subdivisions || too_narrow {
            heap.push(worst);
            let (value, error) = totals(&heap);
            return Err(Error::Convergence {
                value,
                error: error + extra_error,
                subdivisions,
            });
        }
        heap.push(gk15(f, worst.a, mid)?);
        heap.push(gk15(f, mid, worst.b)?);
        subdivisions += 1;
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    // summed in position order
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = crate::sum::compensated_sum(panels.iter().map(|p| p.value));
    let error = panels.iter().map(|p| p.error).sum();
    (value, error)
}

/// `∫₀^∞ f(t) dt` for `|f(t)| ≤ C e^{−rt}`.
///
/// The range is truncated at `T = tail_safety · (ln(1/abs_tol) + ln(1+C)) / r`
/// and the analytic tail bound `C e^{−rT} / r` is added to the error estimate.
pub fn integrate_laplace<F: Fn(f64) -> f64>(
    f: F,
    envelope: Envelope,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    spec.validate()?;
    let rate = positive("decay_rate", envelope.rate)?;
    let amplitude = envelope.amplitude.abs();
    if !amplitude.is_finite() {
        return Err(Error::Argument("envelope amplitude must be finite".into()));
    }
    let cutoff = spec.tail_safety * ((1.0 / spec.abs_tol).ln() + amplitude.ln_1p()).max(1.0) / rate;
    let tail = amplitude * (-rate * cutoff).exp() / rate;
    integrate_panels(&f, 0.0, cutoff, tail, spec)
}

/// `∫₀^∞ (e^{−at} − e^{−bt})/t dt`, which equals `ln(b/a)`.
pub fn log_integral(a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    let a = positive("a", a)?;
    let b = positive("b", b)?;
    let (lo, gap, sign) = if b >= a { (a, b - a, 1.0) } else { (b, a - b, -1.0) };
    let integrand = move |t: f64| {
        if t < 1e-6 {
            // limit b − a plus the linear correction
            sign * gap * (1.0 - 0.5 * (a + b) * t)
        } else {
            sign * (-lo * t).exp() * -(-gap * t).exp_m1() / t
        }
    };
    Ok(integrate_laplace(integrand, Envelope::new(gap, lo), spec)?.value)
}

/// Residual `|∫₀^∞ (e^{−at} − e^{−bt})/t dt − ln(b/a)|`.
pub fn verify_log_identity(a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok((log_integral(a, b, spec)? - (b / a).ln()).abs())
}

/// `∫₀^∞ t^{ω−1} e^{−xt} dt`.
pub fn power_moment(omega: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let omega = positive("omega", omega)?;
    let x = positive("x", x)?;
    if omega < 1.0 {
        // On [0, 1] substitute s = t^ω, which absorbs the t^{ω−1} singularity.
        let inv = 1.0 / omega;
        let head = integrate_interval(|s: f64| (-x * s.powf(inv)).exp(), 0.0, 1.0, spec)?;
        let tail = integrate_laplace(
            |s: f64| (1.0 + s).powf(omega - 1.0) * (-x * (1.0 + s)).exp(),
            Envelope::new((-x).exp(), x),
            spec,
        )?;
        Ok(head.value / omega + tail.value)
    } else {
        let k = omega - 1.0;
        let amplitude = if k > 0.0 {
            (2.0 * k / (std::f64::consts::E * x)).powf(k)
        } else {
            1.0
        };
        let env = Envelope::new(amplitude.max(1.0), 0.5 * x);
        let q = integrate_laplace(|t: f64| t.powf(omega - 1.0) * (-x * t).exp(), env, spec)?;
        Ok(q.value)
    }
}

/// `(1/Γ(ω)) ∫₀^∞ t^{ω−1} e^{−xt} dt`, which equals `x^{−ω}`.
pub fn power_integral(omega: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let m = power_moment(omega, x, spec)?;
    Ok(m / ln_gamma_ref(omega)?.exp())
}

/// Residual `|(1/Γ(ω)) ∫₀^∞ t^{ω−1} e^{−xt} dt − x^{−ω}|`.
pub fn verify_power_identity(omega: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok((power_integral(omega, x, spec)? - x.powf(-omega)).abs())
}

/// `ln p − ∫₀^∞ (1 − e^{−(p+1)t}) / (1 − e^{−t}) · e^{−xt} dt`.
pub fn psi_p_via_integral(p: PIndex, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let x = positive("x", x)?;
    let m = p.as_f64() + 1.0;
    let integrand = move |t: f64| {
        let ratio = if t < 1e-6 {
            // 1 + e^{−t} + … + e^{−pt} ≈ (p+1) − t·p(p+1)/2
            m - 0.5 * t * m * (m - 1.0)
        } else {
            (-m * t).exp_m1() / (-t).exp_m1()
        };
        ratio * (-x * t).exp()
    };
    let q = integrate_laplace(integrand, Envelope::new(m, x), spec)?;
    Ok(p.as_f64().ln() - q.value)
}

/// `θ_{p,1}(x) = x ∫₀^∞ [1 − e^{−(p+1)t}] φ(t) e^{−xt} dt`.
pub fn theta1_via_integral(p: PIndex, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let x = positive("x", x)?;
    let m = p.as_f64() + 1.0;
    let integrand = move |t: f64| {
        let k = phi(t).unwrap_or(f64::NAN);
        -(-m * t).exp_m1() * k * (-x * t).exp()
    };
    let q = integrate_laplace(integrand, Envelope::new(1.0, x), spec)?;
    Ok(x * q.value)
}

// g_p(t) ≤ sup φ′ + (p+1) sup φ ≤ 1/12 + (p+1)
fn density_bound(p: PIndex) -> f64 {
    p.as_f64() + 1.1
}

/// `θ_{p,1}(x) = ∫₀^∞ g_p(t) e^{−xt} dt` with the density from [`bernstein_density`].
pub fn theta1_via_density(p: PIndex, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    cm_moment(p, 0, x, spec)
}

/// `∫₀^∞ tⁿ g_p(t) e^{−xt} dt`, which equals `(−1)^n θ_{p,1}^{(n)}(x)`.
pub fn cm_moment(p: PIndex, n: usize, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    laplace_moment(
        |t| bernstein_density(p, t).unwrap_or(f64::NAN),
        density_bound(p),
        0,
        n,
        x,
        spec,
    )
}

/// `∫₀^∞ tⁿ g(t) e^{−xt} dt` for a density with `|g(t)| ≤ bound · t^power`.
pub fn laplace_moment<G: Fn(f64) -> f64>(
    density: G,
    bound: f64,
    power: usize,
    n: usize,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let x = positive("x", x)?;
    check_order(n)?;
    let ni = n as i32;
    let integrand = move |t: f64| t.powi(ni) * density(t) * (-x * t).exp();
    let env = Envelope::for_moment(n + power, x, bound);
    Ok(integrate_laplace(integrand, env, spec)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::psi_p;
    use crate::theta::{theta, theta_nth, ThetaParams};

    fn p(v: u64) -> PIndex {
        PIndex::new(v).unwrap()
    }

    fn theta1(pv: u64, x: f64) -> f64 {
        theta(ThetaParams::new(p(pv), 1.0).unwrap(), x).unwrap()
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn laplace_examples() {
        let r = integrate_laplace(|t| (-t).exp(), Envelope::new(1.0, 1.0), &spec()).unwrap();
        assert!((r.value - 1.0).abs() <= r.error_estimate.max(1e-14));
        assert!(r.error_estimate <= 1e-13);
        let r = integrate_laplace(
            |t| t * (-2.0 * t).exp(),
            Envelope::for_moment(1, 2.0, 1.0),
            &spec(),
        )
        .unwrap();
        assert!((r.value - 0.25).abs() < 1e-14);
        let r = integrate_laplace(
            |t| t.powi(3) * (-t).exp(),
            Envelope::for_moment(3, 1.0, 1.0),
            &spec(),
        )
        .unwrap();
        assert!((r.value - 6.0).abs() < 1e-12);
        assert!(r.subdivisions_used > 0);
    }

    #[test]
    fn interval_polynomial_is_exact() {
        let r = integrate_interval(|t| 3.0 * t * t, 0.0, 2.0, &spec()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-14);
        assert_eq!(r.subdivisions_used, 0);
    }

    #[test]
    fn convergence_failure_is_reported() {
        let tight = QuadratureSpec {
            rel_tol: 1e-15,
            abs_tol: 1e-30,
            ..spec()
        };
        let r = integrate_laplace(|t| (-t).exp(), Envelope::new(1.0, 1.0), &tight);
        assert!(matches!(r, Err(Error::Convergence { .. })));
        let few = QuadratureSpec {
            max_subdivisions: 10,
            ..spec()
        };
        let r = integrate_interval(|t: f64| t.sqrt(), 0.0, 1.0, &few);
        assert!(matches!(r, Err(Error::Convergence { subdivisions: 10, .. })));
    }

    #[test]
    fn invalid_inputs() {
        let bad = QuadratureSpec {
            max_subdivisions: 3,
            ..spec()
        };
        assert!(integrate_interval(|t| t, 0.0, 1.0, &bad).is_err());
        assert!(integrate_laplace(|t| t, Envelope::new(1.0, 0.0), &spec()).is_err());
        assert!(integrate_interval(|_| f64::NAN, 0.0, 1.0, &spec()).is_err());
        assert!(verify_log_identity(0.0, 1.0, &spec()).is_err());
        assert!(psi_p_via_integral(p(1), -1.0, &spec()).is_err());
    }

    #[test]
    fn log_identity_examples() {
        assert_eq!(verify_log_identity(1.0, 1.0, &spec()).unwrap(), 0.0);
        assert!(verify_log_identity(1.0, std::f64::consts::E, &spec()).unwrap() < 1e-12);
        assert!(verify_log_identity(2.0, 6.0, &spec()).unwrap() < 1e-12);
        assert!(verify_log_identity(6.0, 2.0, &spec()).unwrap() < 1e-12);
        assert!(verify_log_identity(10.0, 0.1, &spec()).unwrap() < 1e-12);
    }

    #[test]
    fn power_identity_examples() {
        assert!((power_moment(1.0, 3.0, &spec()).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!(verify_power_identity(4.0, 1.0, &spec()).unwrap() < 1e-12);
        assert!(verify_power_identity(0.5, 2.0, &spec()).unwrap() < 1e-12);
        assert!(verify_power_identity(0.3, 0.2, &spec()).unwrap() < 1e-9);
        assert!(verify_power_identity(5.0, 0.2, &spec()).unwrap() < 1e-9);
    }

    #[test]
    fn psi_p_integral_examples() {
        assert!((psi_p_via_integral(p(1), 1.0, &spec()).unwrap() + 1.5).abs() < 1e-12);
        assert!((psi_p_via_integral(p(2), 1.0, &spec()).unwrap() + 1.140_186_1).abs() < 1e-7);
        let closed = psi_p(p(5), 0.5).unwrap();
        assert!((psi_p_via_integral(p(5), 0.5, &spec()).unwrap() - closed).abs() < 1e-11);
    }

    #[test]
    fn theta_representations() {
        let s = spec();
        assert!((theta1_via_integral(p(1), 1.0, &s).unwrap() - 0.401_387_7).abs() < 1e-7);
        assert!((theta1_via_integral(p(2), 1.0, &s).unwrap() - 0.447_039_0).abs() < 1e-7);
        assert!((theta1_via_density(p(1), 1.0, &s).unwrap() - theta1(1, 1.0)).abs() < 1e-12);
        let closed = theta1(10, 2.0);
        assert!((theta1_via_density(p(10), 2.0, &s).unwrap() - closed).abs() < 1e-11 * closed);
        for &x in &[0.1, 3.0, 40.0] {
            let a = theta1_via_integral(p(3), x, &s).unwrap();
            let b = theta1_via_density(p(3), x, &s).unwrap();
            assert!(a > 0.0 && b > 0.0);
            assert!((a - b).abs() < 2e-12 * a, "x={x}");
        }
    }

    #[test]
    fn moment_examples() {
        let s = spec();
        assert!((cm_moment(p(1), 0, 1.0, &s).unwrap() - 0.401_387_7).abs() < 1e-7);
        let m1 = cm_moment(p(1), 1, 1.0, &s).unwrap();
        assert!((m1 - 0.181_945_6).abs() < 1e-7);
        let closed = -theta_nth(ThetaParams::new(p(1), 1.0).unwrap(), 1, 1.0).unwrap();
        assert!((m1 - closed).abs() < 1e-12);
        for n in 0..=8 {
            assert!(cm_moment(p(2), n, 0.7, &s).unwrap() > 0.0);
        }
    }
}
