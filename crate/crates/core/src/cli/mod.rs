//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 numerical failure.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::report::Format;

pub use commands::{identity_suite, IdentityResidual, DEFAULT_SEED};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "PPSI_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ppsi",
    version,
    about = "p-gamma / p-psi functions and complete-monotonicity checks"
)]
pub struct Cli {
    /// File of `key = value` lines supplying defaults for long flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output format [default: csv when writing a file, human on stdout]
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Output file, or a directory that receives `<command>.<ext>`
    #[arg(long, short = 'o', global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Human,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Human => Format::Human,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a function at one or more points
    Eval(EvalArgs),
    /// Scan the signs of (-1)^n f^(n)(x) over an (n, x) grid
    ScanCm(ScanArgs),
    /// Check the integral identities on seeded random parameters
    VerifyIdentities(IdentityArgs),
    /// Convergence of psi_p to digamma and the necessity ratio for large x
    LimitStudy(LimitArgs),
    /// Search for x with theta'(x) > 0 when alpha > 1
    FindViolation(ViolationArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::ScanCm(_) => "scan-cm",
            Command::VerifyIdentities(_) => "verify-identities",
            Command::LimitStudy(_) => "limit-study",
            Command::FindViolation(_) => "find-violation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalFunction {
    #[value(name = "gamma_p")]
    GammaP,
    #[value(name = "psi_p")]
    PsiP,
    #[value(name = "psi_p_nth")]
    PsiPNth,
    #[value(name = "digamma")]
    Digamma,
    #[value(name = "phi")]
    Phi,
    #[value(name = "phi_prime")]
    PhiPrime,
    #[value(name = "density")]
    Density,
    #[value(name = "theta")]
    Theta,
    #[value(name = "theta_nth")]
    ThetaNth,
    #[value(name = "ratio")]
    Ratio,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub function: EvalFunction,
    #[arg(long)]
    pub p: Option<u64>,
    /// Exponent of theta [default: 1]
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Derivative order
    #[arg(long)]
    pub n: Option<usize>,
    /// Evaluation points, comma separated
    #[arg(
        long,
        visible_alias = "t",
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub x: Vec<f64>,
    /// Log-spaced points `LO:HI:COUNT`, appended after --x
    #[arg(long, value_name = "LO:HI:COUNT")]
    pub x_range: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Theta,
    PsiPPrime,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Theta)]
    pub family: FamilyArg,
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub x_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    /// Highest derivative order N
    #[arg(long, default_value_t = 10)]
    pub max_order: usize,
    /// A value violates iff it is below -tol * scale
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Succeed iff a violation is found
    #[arg(long)]
    pub expect_violation: bool,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
    /// Largest accepted residual |got - expected| / max(1, |expected|)
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Points for the psi_p -> digamma sweep
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 10.0])]
    pub x: Vec<f64>,
    /// p values for the sweep (integers, `1e6` notation accepted)
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_values_t = [1_000u64, 10_000, 100_000, 1_000_000])]
    pub p: Vec<u64>,
    /// p values for the ratio table
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_values_t = [1u64, 5, 20])]
    pub ratio_p: Vec<u64>,
    /// x values for the ratio table
    #[arg(long, value_delimiter = ',', default_values_t = [1e2, 1e3, 1e4, 1e5, 1e6])]
    pub ratio_x: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ViolationArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x_start: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1e9)]
    pub x_max: f64,
    #[arg(long, default_value_t = 2.0)]
    pub factor: f64,
    /// A witness needs -theta'(x) < -tol
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

/// Parses a non-negative integer, also in `1e6` notation.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(63) {
        Ok(v as u64)
    } else {
        Err(format!("`{s}` is not a non-negative integer"))
    }
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Verification(_) => EXIT_VERIFICATION,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Verification(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

/// What a command produced. The body is written to the destination;
/// sidecars are written next to it when the destination is a file.
pub struct Outcome {
    pub body: String,
    pub sidecars: Vec<(&'static str, String)>,
    pub notes: Vec<String>,
    pub verification: Option<String>,
}

impl Outcome {
    fn new(body: String) -> Self {
        Outcome {
            body,
            sidecars: Vec::new(),
            notes: Vec::new(),
            verification: None,
        }
    }
}

fn destination(output: Option<&Path>, env_dir: Option<&Path>, name: &str, format: Format) -> Option<PathBuf> {
    let file = format!("{name}.{}", format.extension());
    match (output, env_dir) {
        (Some(p), _) if p.is_dir() => Some(p.join(file)),
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(d)) => Some(d.join(file)),
        (None, None) => None,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn parse_args(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let cmd = Cli::command();
    let argv = match config::config_path(&argv) {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| {
                cmd.clone().error(
                    clap::error::ErrorKind::Io,
                    format!("--config: cannot read {}: {e}", Path::new(&path).display()),
                )
            })?;
            let entries = config::parse(&text).map_err(|m| {
                cmd.clone()
                    .error(clap::error::ErrorKind::InvalidValue, format!("--config: {m}"))
            })?;
            config::merge(argv, &cmd, &entries).map_err(|m| {
                cmd.clone()
                    .error(clap::error::ErrorKind::InvalidValue, format!("--config: {m}"))
            })?
        }
        None => argv,
    };
    let matches = cmd.try_get_matches_from(argv)?;
    Cli::from_arg_matches(&matches)
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    match execute(&cli, env_dir.as_deref()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

fn execute(cli: &Cli, env_dir: Option<&Path>) -> Result<i32, Failure> {
    let dest_given = cli.output.is_some() || env_dir.is_some();
    let format: Format = match cli.format {
        Some(f) => f.into(),
        None if dest_given => Format::Csv,
        None => Format::Human,
    };
    let outcome = match &cli.command {
        Command::Eval(a) => commands::eval(a, format)?,
        Command::ScanCm(a) => commands::scan_cm(a, format)?,
        Command::VerifyIdentities(a) => commands::verify_identities(a, format)?,
        Command::LimitStudy(a) => commands::limit_study(a, format)?,
        Command::FindViolation(a) => commands::find_violation(a, format)?,
    };
    match destination(cli.output.as_deref(), env_dir, cli.command.name(), format) {
        Some(path) => {
            write_file(&path, &outcome.body)?;
            for (suffix, contents) in &outcome.sidecars {
                write_file(&sidecar_path(&path, suffix), contents)?;
            }
        }
        None => {
            let mut out = io::stdout().lock();
            let _ = out.write_all(outcome.body.as_bytes());
            let _ = out.flush();
        }
    }
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    Ok(match outcome.verification {
        Some(msg) => {
            eprintln!("verification failed: {msg}");
            EXIT_VERIFICATION
        }
        None => EXIT_OK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn counts_accept_exponent_notation() {
        assert_eq!(parse_count("1000"), Ok(1000));
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("x").is_err());
    }

    #[test]
    fn output_destinations() {
        let dir = std::env::temp_dir();
        assert_eq!(destination(None, None, "eval", Format::Csv), None);
        assert_eq!(
            destination(None, Some(Path::new("/out")), "scan-cm", Format::Json),
            Some(PathBuf::from("/out/scan-cm.json"))
        );
        assert_eq!(
            destination(
                Some(Path::new("r.csv")),
                Some(Path::new("/out")),
                "eval",
                Format::Csv
            ),
            Some(PathBuf::from("r.csv"))
        );
        assert_eq!(
            destination(Some(&dir), None, "eval", Format::Human),
            Some(dir.join("eval.txt"))
        );
        assert_eq!(
            sidecar_path(Path::new("/a/scan.csv"), "summary.json"),
            PathBuf::from("/a/scan.summary.json")
        );
    }

    #[test]
    fn parses_subcommands() {
        let cli = parse_args(
            ["ppsi", "eval", "theta", "--p", "1", "--x", "1,2", "--t", "3"]
                .map(OsString::from)
                .to_vec(),
        )
        .unwrap();
        match cli.command {
            Command::Eval(a) => {
                assert_eq!(a.function, EvalFunction::Theta);
                assert_eq!(a.x, vec![1.0, 2.0, 3.0]);
            }
            _ => panic!("wrong command"),
        }
        let cli = parse_args(
            ["ppsi", "limit-study", "--p", "1e3,1e4"]
                .map(OsString::from)
                .to_vec(),
        )
        .unwrap();
        match cli.command {
            Command::LimitStudy(a) => {
                assert_eq!(a.p, vec![1000, 10000]);
                assert_eq!(a.ratio_p, vec![1, 5, 20]);
            }
            _ => panic!("wrong command"),
        }
    }
}
