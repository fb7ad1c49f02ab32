use std::fmt::Write as _;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    EvalArgs, EvalFunction, Failure, FamilyArg, IdentityArgs, LimitArgs, Outcome, ScanArgs, ViolationArgs,
};
use crate::cmcheck::{cm_scan, FunctionFamily, LogGrid, Verdict};
use crate::error::Error;
use crate::kernel::{bernstein_density, phi, phi_prime};
use crate::quad::{
    log_integral, power_integral, psi_p_via_integral, theta1_via_density, theta1_via_integral, QuadratureSpec,
};
use crate::report::{self, Cell, Format, Table};
use crate::specfun::{check_order, digamma_ref, gamma_p, psi_p, psi_p_nth, PIndex};
use crate::theta::{find_cm_violation, necessity_ratio, theta, theta_nth, ThetaParams, ViolationSearch};

/// Seed used by `verify-identities` unless `--seed` is given.
pub const DEFAULT_SEED: u64 = 0x5eed;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn pindex(p: u64) -> Result<PIndex, Failure> {
    PIndex::new(p).map_err(|_| usage(format!("--p must be >= 1, got {p}")))
}

fn positive(flag: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(format!("{flag} must be finite and > 0, got {v}")))
    }
}

/// Input errors become usage failures that name the flag; anything else is numerical.
fn input_error(e: Error) -> Failure {
    match &e {
        Error::Domain { name, .. } => usage(format!("--{name}: {e}")),
        Error::Order { .. } => usage(format!("--n: {e}")),
        Error::Argument(_) => usage(e.to_string()),
        _ => Failure::Numerical(e.to_string()),
    }
}

fn parse_range(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || usage(format!("--x-range expects LO:HI:COUNT, got `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    let grid = LogGrid::new(lo, hi, count).map_err(|e| usage(format!("--x-range: {e}")))?;
    Ok(grid.points())
}

pub(super) fn eval(a: &EvalArgs, format: Format) -> Result<Outcome, Failure> {
    use EvalFunction::*;
    let name = a
        .function
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    let uses_p = matches!(
        a.function,
        GammaP | PsiP | PsiPNth | Density | Theta | ThetaNth | Ratio
    );
    let uses_alpha = matches!(a.function, Theta | ThetaNth);
    let uses_n = matches!(a.function, PsiPNth | ThetaNth);

    let p = match (uses_p, a.p) {
        (true, Some(p)) => Some(pindex(p)?),
        (true, None) => return Err(usage(format!("--p is required for {name}"))),
        (false, _) => None,
    };
    let n = match (uses_n, a.n) {
        (true, Some(n)) => Some(check_order(n).map_err(|e| usage(format!("--n: {e}")))?),
        (true, None) => return Err(usage(format!("--n is required for {name}"))),
        (false, _) => None,
    };
    let alpha = uses_alpha.then(|| a.alpha.unwrap_or(1.0));
    let params = match (p, alpha) {
        (Some(p), Some(alpha)) => {
            Some(ThetaParams::new(p, alpha).map_err(|e| usage(format!("--alpha: {e}")))?)
        }
        _ => None,
    };

    let mut xs = a.x.clone();
    if let Some(r) = &a.x_range {
        xs.extend(parse_range(r)?);
    }
    if xs.is_empty() {
        return Err(usage(format!(
            "{name} needs at least one point (--x, --t or --x-range)"
        )));
    }
    for &x in &xs {
        positive("--x", x)?;
    }

    let mut table = Table::new(&["function", "p", "alpha", "n", "x", "value"]);
    for &x in &xs {
        let value = match a.function {
            GammaP => gamma_p(p.unwrap(), x),
            PsiP => psi_p(p.unwrap(), x),
            PsiPNth => psi_p_nth(p.unwrap(), n.unwrap(), x),
            Digamma => digamma_ref(x),
            Phi => phi(x),
            PhiPrime => phi_prime(x),
            Density => bernstein_density(p.unwrap(), x),
            Theta => theta(params.unwrap(), x),
            ThetaNth => theta_nth(params.unwrap(), n.unwrap(), x),
            Ratio => necessity_ratio(p.unwrap(), x),
        }
        .map_err(input_error)?;
        table.push(vec![
            name.as_str().into(),
            p.map(PIndex::get).into(),
            alpha.into(),
            n.into(),
            x.into(),
            value.into(),
        ]);
    }
    Ok(Outcome::new(table.render(format)))
}

#[derive(Serialize)]
struct ScanDocument<'a> {
    summary: &'a crate::cmcheck::CMScanReport,
    samples: Table,
}

pub(super) fn scan_cm(a: &ScanArgs, format: Format) -> Result<Outcome, Failure> {
    let p = pindex(a.p)?;
    let grid = LogGrid::new(a.x_min, a.x_max, a.points)
        .map_err(|e| usage(format!("--x-min/--x-max/--points: {e}")))?;
    check_order(a.max_order).map_err(|e| usage(format!("--max-order: {e}")))?;
    if !(a.tol >= 0.0 && a.tol.is_finite()) {
        return Err(usage(format!("--tol must be finite and >= 0, got {}", a.tol)));
    }
    let family = match a.family {
        FamilyArg::Theta => {
            FunctionFamily::theta(ThetaParams::new(p, a.alpha).map_err(|e| usage(format!("--alpha: {e}")))?)
        }
        FamilyArg::PsiPPrime => FunctionFamily::psi_p_prime(p),
    };
    let r = cm_scan(&family, &grid, a.max_order, a.tol)?;

    let mut out = match format {
        Format::Csv => {
            let mut o = Outcome::new(report::scan_samples(&r).to_csv());
            o.sidecars.push(("summary.json", report::scan_summary_json(&r)));
            o
        }
        Format::Json => {
            let doc = ScanDocument {
                summary: &r,
                samples: report::scan_samples(&r),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
            s.push('\n');
            Outcome::new(s)
        }
        Format::Human => Outcome::new(report::scan_summary_human(&r)),
    };
    out.notes.push(format!("{}: {:?}", r.family, r.verdict));
    out.verification = match (a.expect_violation, r.verdict, &r.witness) {
        (false, Verdict::Violated, Some(w)) => Some(format!(
            "{} violates complete monotonicity at n = {}, x = {} (value {:e})",
            r.family, w.n, w.x, w.value
        )),
        (true, Verdict::Consistent, _) => Some(format!(
            "expected a violation for {}, but the scan is consistent",
            r.family
        )),
        _ => None,
    };
    Ok(out)
}

/// One evaluated identity: `computed` should equal `expected`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub identity: &'static str,
    pub draw: usize,
    pub p: Option<u64>,
    pub arg1: f64,
    pub arg2: Option<f64>,
    pub expected: f64,
    pub computed: f64,
    /// `|computed − expected| / max(1, |expected|)`
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Log { a: f64, b: f64 },
    Power { omega: f64, x: f64 },
    PsiIntegral { p: PIndex, x: f64 },
    ThetaIntegral { p: PIndex, x: f64 },
    ThetaDensity { p: PIndex, x: f64 },
}

impl Job {
    fn run(self, draw: usize, spec: &QuadratureSpec) -> crate::Result<IdentityResidual> {
        let (identity, p, arg1, arg2, expected, computed) = match self {
            Job::Log { a, b } => ("log", None, a, Some(b), (b / a).ln(), log_integral(a, b, spec)?),
            Job::Power { omega, x } => (
                "power",
                None,
                omega,
                Some(x),
                x.powf(-omega),
                power_integral(omega, x, spec)?,
            ),
            Job::PsiIntegral { p, x } => (
                "psi-integral",
                Some(p),
                x,
                None,
                psi_p(p, x)?,
                psi_p_via_integral(p, x, spec)?,
            ),
            Job::ThetaIntegral { p, x } => {
                let t = theta(ThetaParams::new(p, 1.0)?, x)?;
                (
                    "theta-integral",
                    Some(p),
                    x,
                    None,
                    t,
                    theta1_via_integral(p, x, spec)?,
                )
            }
            Job::ThetaDensity { p, x } => {
                let t = theta(ThetaParams::new(p, 1.0)?, x)?;
                (
                    "theta-density",
                    Some(p),
                    x,
                    None,
                    t,
                    theta1_via_density(p, x, spec)?,
                )
            }
        };
        Ok(IdentityResidual {
            identity,
            draw,
            p: p.map(PIndex::get),
            arg1,
            arg2,
            expected,
            computed,
            residual: (computed - expected).abs() / expected.abs().max(1.0),
        })
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

/// Evaluates every identity on `draws` seeded random parameter sets.
///
/// Parameters: log `a ∈ [0.1, 10]`, `b = a·e^{±u}` with `u ∈ [0.1, 3]`;
/// power `ω ∈ [0.2, 4]`, `x ∈ [0.3, 10]`; the ψ_p and θ_{p,1} integrals use
/// `p ∈ 1..=20` and `x ∈ [0.1, 20]`. Results are grouped by identity, then draw.
pub fn identity_suite(
    seed: u64,
    draws: usize,
    spec: &QuadratureSpec,
) -> crate::Result<Vec<IdentityResidual>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: [Vec<Job>; 5] = Default::default();
    for _ in 0..draws {
        let a = log_uniform(&mut rng, 0.1, 10.0);
        let u = rng.random_range(0.1..3.0f64);
        let b = if rng.random::<bool>() {
            a * u.exp()
        } else {
            a / u.exp()
        };
        groups[0].push(Job::Log { a, b });
        let omega = rng.random_range(0.2..4.0);
        let x = log_uniform(&mut rng, 0.3, 10.0);
        groups[1].push(Job::Power { omega, x });
        for (k, make) in [
            (2, (|p, x| Job::PsiIntegral { p, x }) as fn(PIndex, f64) -> Job),
            (3, |p, x| Job::ThetaIntegral { p, x }),
            (4, |p, x| Job::ThetaDensity { p, x }),
        ] {
            let p = PIndex::new(rng.random_range(1..=20u64))?;
            let x = log_uniform(&mut rng, 0.1, 20.0);
            groups[k].push(make(p, x));
        }
    }
    let jobs: Vec<(usize, Job)> = groups
        .into_iter()
        .flat_map(|g| g.into_iter().enumerate())
        .collect();
    jobs.par_iter().map(|&(i, job)| job.run(i, spec)).collect()
}

pub(super) fn verify_identities(a: &IdentityArgs, format: Format) -> Result<Outcome, Failure> {
    if !(a.rel_tol > 0.0 && a.rel_tol.is_finite()) {
        return Err(usage(format!(
            "--rel-tol must be finite and > 0, got {}",
            a.rel_tol
        )));
    }
    if a.draws == 0 {
        return Err(usage("--draws must be >= 1"));
    }
    let rows = identity_suite(a.seed, a.draws, &QuadratureSpec::default())?;

    let mut table = Table::new(&[
        "identity", "draw", "p", "arg1", "arg2", "expected", "computed", "residual",
    ]);
    for r in &rows {
        table.push(vec![
            r.identity.into(),
            r.draw.into(),
            r.p.into(),
            r.arg1.into(),
            r.arg2.into(),
            r.expected.into(),
            r.computed.into(),
            r.residual.into(),
        ]);
    }
    let mut out = Outcome::new(table.render(format));

    let mut failing = String::new();
    let mut names: Vec<&str> = rows.iter().map(|r| r.identity).collect();
    names.dedup();
    for name in names {
        let group: Vec<&IdentityResidual> = rows.iter().filter(|r| r.identity == name).collect();
        let worst = group
            .iter()
            .max_by(|x, y| x.residual.total_cmp(&y.residual))
            .expect("non-empty group");
        let bad = group
            .iter()
            .filter(|r| r.residual.is_nan() || r.residual > a.rel_tol)
            .count();
        out.notes.push(format!(
            "{name:<15} worst residual {:.3e} (draw {}), {bad}/{} above {:e}",
            worst.residual,
            worst.draw,
            group.len(),
            a.rel_tol
        ));
        if bad > 0 {
            let _ = write!(
                failing,
                "{}{name} (worst {:.3e})",
                if failing.is_empty() { "" } else { ", " },
                worst.residual
            );
        }
    }
    if !failing.is_empty() {
        out.verification = Some(format!("residuals above {:e}: {failing}", a.rel_tol));
    }
    Ok(out)
}

/// Least-squares order `q` in `err ≈ C p^{−q}`.
pub(crate) fn fitted_order(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(p, e)| *p > 0.0 && *e > 0.0)
        .map(|&(p, e)| (p.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

pub(super) fn limit_study(a: &LimitArgs, format: Format) -> Result<Outcome, Failure> {
    for (flag, empty) in [
        ("--x", a.x.is_empty()),
        ("--p", a.p.is_empty()),
        ("--ratio-p", a.ratio_p.is_empty()),
        ("--ratio-x", a.ratio_x.is_empty()),
    ] {
        if empty {
            return Err(usage(format!("{flag} list is empty")));
        }
    }
    for &x in &a.x {
        positive("--x", x)?;
    }
    for &x in &a.ratio_x {
        positive("--ratio-x", x)?;
    }
    let ps = a.p.iter().map(|&p| pindex(p)).collect::<Result<Vec<_>, _>>()?;
    let ratio_ps = a
        .ratio_p
        .iter()
        .map(|&p| PIndex::new(p).map_err(|_| usage(format!("--ratio-p must be >= 1, got {p}"))))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new(&["kind", "p", "x", "value"]);
    let mut orders = Vec::new();
    for &x in &a.x {
        let reference = digamma_ref(x)?;
        let mut pts = Vec::new();
        for &p in &ps {
            let err = (psi_p(p, x)? - reference).abs();
            pts.push((p.as_f64(), err));
            table.push(vec!["error".into(), p.get().into(), x.into(), err.into()]);
        }
        orders.push((x, fitted_order(&pts)));
    }
    for &(x, q) in &orders {
        table.push(vec!["order".into(), Cell::Empty, x.into(), q.into()]);
    }
    for &p in &ratio_ps {
        for &x in &a.ratio_x {
            table.push(vec![
                "ratio".into(),
                p.get().into(),
                x.into(),
                necessity_ratio(p, x)?.into(),
            ]);
        }
    }
    let mut out = Outcome::new(table.render(format));
    for (x, q) in orders {
        if let Some(q) = q {
            out.notes.push(format!("x = {x}: fitted order {q:.4}"));
        }
    }
    Ok(out)
}

pub(super) fn find_violation(a: &ViolationArgs, format: Format) -> Result<Outcome, Failure> {
    let p = pindex(a.p)?;
    if !(a.alpha > 1.0 && a.alpha.is_finite()) {
        return Err(usage(format!(
            "--alpha must be finite and > 1 (theta is completely monotonic for alpha <= 1), got {}",
            a.alpha
        )));
    }
    let x_min = positive("--x-min", a.x_min)?;
    let x_max = positive("--x-max", a.x_max)?;
    let start = positive("--x-start", a.x_start)?;
    if x_max < x_min {
        return Err(usage("--x-max must be >= --x-min"));
    }
    if !(a.factor > 1.0 && a.factor.is_finite()) {
        return Err(usage(format!(
            "--factor must be finite and > 1, got {}",
            a.factor
        )));
    }
    if !(a.tol >= 0.0 && a.tol.is_finite()) {
        return Err(usage(format!("--tol must be finite and >= 0, got {}", a.tol)));
    }
    let params = ThetaParams::new(p, a.alpha).map_err(|e| usage(format!("--alpha: {e}")))?;
    let search = ViolationSearch {
        start,
        factor: a.factor,
        x_min,
        x_max,
        tolerance: a.tol,
    };
    let witness = find_cm_violation(params, &search)?;

    let mut table = Table::new(&["p", "alpha", "n", "x", "value", "ratio"]);
    if let Some(w) = &witness {
        table.push(vec![
            p.get().into(),
            a.alpha.into(),
            w.n.into(),
            w.x.into(),
            w.value.into(),
            necessity_ratio(p, w.x)?.into(),
        ]);
    }
    let mut out = Outcome::new(table.render(format));
    if witness.is_none() {
        out.verification = Some(format!(
            "no x in [{x_min:e}, {x_max:e}] with theta'(x) > {:e}",
            a.tol
        ));
    }
    Ok(out)
}
