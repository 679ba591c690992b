//! Command-line surface: argument types, dispatch, reports and exit codes.
//!
//! Exit codes: `0` success, `1` a check failed, `2` bad input,
//! `3` the feasibility certificate failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function_models::{Interpolation, Tail};
use crate::lp_search::{GridSpec, SearchConfig};
use crate::special_values::{Form, Params};

mod commands;
pub mod plot;

pub use commands::{
    cmd_equivalence, cmd_evaluate, cmd_search, cmd_sharp_bound, cmd_sweep, cmd_verify_extremal,
    extremal_checks, sweep_rows, ExtremalCheck, SweepRow,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "intineq",
    version,
    about = "Sharp constants, extremal checks and LP counterexample search"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the sharp constant of a formulation.
    SharpBound(SharpBoundArgs),
    /// Check that the extremal power laws turn every inequality into an equality.
    VerifyExtremal(VerifyArgs),
    /// Normalize a tabulated test function and compare it with the sharp bound.
    Evaluate(EvaluateArgs),
    /// Evaluate one density in all three formulations and compare the ratios.
    Equivalence(EquivalenceArgs),
    /// Solve, certify and report the step-function LP.
    Search(SearchArgs),
    /// Run the search over a grid of parameters.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ParamArgs {
    #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: u32,
}

impl ParamArgs {
    pub fn params(&self) -> Result<Params> {
        match (self.lambda, self.alpha) {
            (Some(l), None) => Params::from_lambda(l, self.n),
            (None, Some(a)) => Params::from_alpha(a, self.n),
            _ => Err(Error::Config(
                "give exactly one of --lambda and --alpha".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SharpBoundArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_parser = clap::value_parser!(Form))]
    pub form: Form,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Largest accepted deviation from equality.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Which formulation's object the file tabulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionClass {
    /// Increasing density `s` of a log-convex `S`.
    S,
    /// Increasing `h ≥ 0`.
    H,
    /// Nonnegative density `q`.
    Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpArg {
    Linear,
    Step,
}

impl From<InterpArg> for Interpolation {
    fn from(v: InterpArg) -> Self {
        match v {
            InterpArg::Linear => Interpolation::Linear,
            InterpArg::Step => Interpolation::StepLeft,
        }
    }
}

/// `const` or `power:<exponent>`.
pub fn parse_tail(s: &str) -> std::result::Result<Tail, String> {
    if s == "const" {
        return Ok(Tail::Constant);
    }
    match s.strip_prefix("power:") {
        Some(p) => p
            .parse::<f64>()
            .ok()
            .filter(|p| p.is_finite())
            .map(Tail::Power)
            .ok_or_else(|| format!("bad tail exponent {p:?}")),
        None => Err(format!("tail must be `const` or `power:<exp>`, got {s:?}")),
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FunctionFileArgs {
    /// CSV file with a `knot,value` header.
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    pub interp: InterpArg,
    #[arg(long, value_parser = parse_tail, default_value = "const")]
    #[serde(serialize_with = "serialize_tail")]
    pub tail: Tail,
}

fn serialize_tail<S: serde::Serializer>(t: &Tail, s: S) -> std::result::Result<S::Ok, S::Error> {
    match t {
        Tail::Constant => s.serialize_str("const"),
        Tail::Power(p) => s.serialize_str(&format!("power:{p}")),
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScanArgs {
    /// Points of the log-spaced constraint scan.
    #[arg(long, default_value_t = 400)]
    pub scan_points: usize,
    #[arg(long)]
    pub scan_t_min: Option<f64>,
    #[arg(long)]
    pub scan_t_max: Option<f64>,
    /// Relative tolerance of the finite-range quadratures.
    #[arg(long, default_value_t = 1e-11)]
    pub quad_rel_tol: f64,
    /// Relative tolerance of the half-line quadratures.
    #[arg(long, default_value_t = 1e-10)]
    pub quad_semi_infinite_rel_tol: f64,
}

impl ScanArgs {
    pub fn eval_config(&self) -> Result<crate::functionals::EvalConfig> {
        for (name, v) in [
            ("quad-rel-tol", self.quad_rel_tol),
            (
                "quad-semi-infinite-rel-tol",
                self.quad_semi_infinite_rel_tol,
            ),
        ] {
            positive(name, v)?;
        }
        let mut cfg = crate::functionals::EvalConfig::default();
        cfg.quad = crate::quadrature::QuadConfig::relative(self.quad_rel_tol);
        cfg.quad_semi_infinite =
            crate::quadrature::QuadConfig::relative(self.quad_semi_infinite_rel_tol);
        cfg.scan.points = self.scan_points;
        cfg.scan.t_min = self.scan_t_min;
        cfg.scan.t_max = self.scan_t_max;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub function: FunctionFileArgs,
    #[arg(long, value_enum)]
    pub class: FunctionClass,
    /// Formulation to evaluate; defaults to the one matching `--class`.
    #[arg(long, value_parser = clap::value_parser!(Form))]
    pub form: Option<Form>,
    #[command(flatten)]
    pub scan: ScanArgs,
    /// Write `(t, ratio)` samples of the constraint scan.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Write a line plot of the same samples.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Args, Debug, Clone, Serialize)]
#[group(id = "source", required = true, multiple = false)]
pub struct DensitySource {
    /// Density `s` as a `knot,value` file.
    #[arg(long, group = "source")]
    pub file: Option<PathBuf>,
    /// Use the extremal density.
    #[arg(long, group = "source")]
    pub extremal: bool,
    /// Draw a random piecewise-linear density from this seed.
    #[arg(long, group = "source")]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EquivalenceArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub source: DensitySource,
    #[arg(long, value_enum, default_value = "linear")]
    pub interp: InterpArg,
    #[arg(long, value_parser = parse_tail, default_value = "const")]
    #[serde(serialize_with = "serialize_tail")]
    pub tail: Tail,
    /// Largest accepted gap between the ratios.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub tau_max: f64,
    /// Number of jump knots.
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e5)]
    pub t_max: f64,
    /// Number of constraint points.
    #[arg(long, default_value_t = 400)]
    pub j: usize,
    /// Start of the analytic tail certificate.
    #[arg(long, default_value_t = 1e5)]
    pub t_con: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub iteration_cap: usize,
    /// Certificate points per constraint-grid interval.
    #[arg(long, default_value_t = 4)]
    pub check_density: usize,
    /// Largest shrink of the LP optimum accepted before certification.
    #[arg(long, default_value_t = 1.25)]
    pub max_shrink: f64,
}

impl GridArgs {
    pub fn search_config(&self) -> Result<SearchConfig> {
        for (name, v) in [
            ("tau-min", self.tau_min),
            ("tau-max", self.tau_max),
            ("t-min", self.t_min),
            ("t-max", self.t_max),
            ("t-con", self.t_con),
        ] {
            positive(name, v)?;
        }
        if !(self.max_shrink >= 1.0) {
            return Err(Error::Config(format!(
                "max-shrink must be at least 1, got {}",
                self.max_shrink
            )));
        }
        Ok(SearchConfig {
            tau: GridSpec {
                min: self.tau_min,
                max: self.tau_max,
                points: self.m,
            },
            t: GridSpec {
                min: self.t_min,
                max: self.t_max,
                points: self.j,
            },
            t_con: self.t_con,
            iteration_cap: self.iteration_cap,
            check_density: self.check_density,
            max_shrink: self.max_shrink,
        })
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Directory for `h_profile.csv`, `certificate.json` and `summary.csv`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write `h_profile.svg`.
    #[arg(long)]
    pub svg: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<u32>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Summary CSV, one row per `(α, n)` cell.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be finite and positive, got {v}"
        )))
    }
}

/// The parent directory of an output file must exist before any work starts.
pub(crate) fn check_output_path(path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if parent.is_dir() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "output directory {} does not exist",
            parent.display()
        )))
    }
}

/// Every JSON report carries the tool version and the full configuration.
#[derive(Serialize)]
pub struct Report<'a, C: Serialize, B: Serialize> {
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a C,
    #[serde(flatten)]
    pub body: B,
}

pub(crate) fn report_json<C: Serialize, B: Serialize>(
    command: &'static str,
    config: &C,
    body: B,
) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Report {
        version: VERSION,
        command,
        config,
        body,
    })?;
    s.push('\n');
    Ok(s)
}

/// Six significant digits for human-readable output.
pub fn human(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Normalization(_)
        | Error::Divergence(_)
        | Error::Capability(_)
        | Error::NonFiniteIntegrand { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` and runs the command, writing reports to `out`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = write!(err, "{}", e.render());
            if !e.use_stderr() {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::SharpBound(a) => cmd_sharp_bound(a, out),
        Command::VerifyExtremal(a) => cmd_verify_extremal(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out),
        Command::Equivalence(a) => cmd_equivalence(a, out),
        Command::Search(a) => cmd_search(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
    };
    match result {
        Ok(code) => code,
        // A reader that hung up early (`| head`) is not an error of ours.
        Err(Error::Io { ref source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => {
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
