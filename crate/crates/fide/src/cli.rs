//! Command-line interface of the `fide` binary.
//!
//! Subcommands:
//!
//! * `solve` — integrate one problem on one grid, emit the trajectory;
//! * `converge` — error/order study over a ladder of step sizes;
//! * `stability` — sample a linear-stability region boundary;
//! * `bench` — time the fast solver against the stepwise reference;
//! * `list-problems` — print the problem catalogue.
//!
//! Exit codes: `0` on success, `2` for invalid flags or flag values
//! (including unknown problem keys), `1` for solver failures. Output goes
//! to `--out` (or stdout) as CSV or JSON; CSV files gain a
//! `<stem>.config.json` sidecar recording the resolved configuration.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use fide_core::corrections::CorrectionPlan;
use fide_core::stability::{boundary_locus, StabilityQuery};
use fide_core::stepper::Scheme;

use crate::io::{
    self, ConvergenceDoc, RunManifest, StabilityDoc, TimingDoc, TrajectoryDoc,
};
use crate::registry::{self, ProblemInstance};
use crate::runner::{self, RunSettings, DEFAULT_MAX_REF_N};

/// A bad flag or flag value; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(UsageError(message.to_string()))
}

/// Fast IMEX and Adams–Moulton solvers for Caputo fractional ODEs.
#[derive(Debug, Parser)]
#[command(name = "fide", version, about)]
pub struct Cli {
    /// Subcommand to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Top-level subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one problem and write the trajectory.
    Solve(SolveArgs),
    /// Measure errors and orders over a ladder of step sizes.
    Converge(ConvergeArgs),
    /// Sample the boundary of a linear-stability region.
    Stability(StabilityArgs),
    /// Time the fast solver against the stepwise reference.
    Bench(BenchArgs),
    /// List the built-in problems.
    ListProblems,
}

/// Scheme family flag.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    /// Fully implicit fractional Adams–Moulton.
    Famm,
    /// Implicit in the linear part, extrapolated force.
    Imex,
}

impl From<SchemeArg> for Scheme {
    fn from(value: SchemeArg) -> Scheme {
        match value {
            SchemeArg::Famm => Scheme::Famm,
            SchemeArg::Imex => Scheme::Imex,
        }
    }
}

/// Output format flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// Comma-separated values (plus a JSON config sidecar when written to
    /// a file).
    Csv,
    /// A single JSON document embedding the configuration.
    Json,
}

/// Problem and solver flags shared by the solver subcommands.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Problem key (see `list-problems`).
    #[arg(long)]
    pub problem: String,
    /// Scheme family (default: the problem's usual scheme).
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Interpolation degree: 0 (first order) or 1 (second order).
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    /// Fractional order in (0, 1].
    #[arg(long)]
    pub alpha: f64,
    /// Horizon override (default: the problem's standard T).
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Correction powers "s1,s2,...;d1,d2,..." (solution;force families).
    /// One list corrects both; default none.
    #[arg(long)]
    pub corrections: Option<String>,
    /// Picard tolerance override.
    #[arg(long)]
    pub picard_tol: Option<f64>,
    /// Epsilon-circulant embedding parameter in (0, 1).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Gauss–Jacobi points for kernel and correction quadrature.
    #[arg(long = "Q")]
    pub quad_points: Option<usize>,
}

/// Output destination and format flags.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

/// Flags of `fide solve`.
#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Step size (must divide the horizon).
    #[arg(long)]
    pub h: f64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Flags of `fide converge`.
#[derive(Debug, Args)]
#[command(group(ArgGroup::new("grid").required(true).args(["h", "h_min_exp"])))]
pub struct ConvergeArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Single step size (alternative to the exponent range).
    #[arg(long)]
    pub h: Option<f64>,
    /// Smallest exponent of the ladder: the coarsest step is 2^-e.
    #[arg(long, requires = "h_max_exp")]
    pub h_min_exp: Option<u32>,
    /// Largest exponent of the ladder: the finest step is 2^-e.
    #[arg(long, requires = "h_min_exp", conflicts_with = "h")]
    pub h_max_exp: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Flags of `fide stability`.
#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Fractional order in (0, 1].
    #[arg(long)]
    pub alpha: f64,
    /// Interpolation degree: 0 or 1.
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    /// Explicit-to-implicit ratio of the test equation `D^a u = l u + k l u`.
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    /// History row used to truncate the lag generating function.
    #[arg(long, default_value_t = 100_000)]
    pub k_trunc: usize,
    /// Number of unit-circle samples.
    #[arg(long, default_value_t = 1024)]
    pub n_samples: usize,
    #[command(flatten)]
    output: OutputArgs,
}

/// Flags of `fide bench`.
#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Smallest grid as an exponent: N = 2^e.
    #[arg(long, default_value_t = 12)]
    pub n_min_exp: u32,
    /// Largest grid as an exponent.
    #[arg(long, default_value_t = 14)]
    pub n_max_exp: u32,
    /// Runs per measurement (the median is reported).
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Largest N the stepwise reference is timed at.
    #[arg(long, default_value_t = DEFAULT_MAX_REF_N)]
    pub max_ref_n: usize,
    #[command(flatten)]
    output: OutputArgs,
}

/// Executes a parsed command line.
///
/// # Errors
///
/// [`UsageError`] for bad flag values (exit 2); other errors are solver or
/// IO failures (exit 1).
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Converge(args) => cmd_converge(args),
        Command::Stability(args) => cmd_stability(args),
        Command::Bench(args) => cmd_bench(args),
        Command::ListProblems => cmd_list_problems(),
    }
}

/// Builds the problem and resolves flag overrides into run settings.
fn resolve(args: &ProblemArgs) -> Result<(ProblemInstance, RunSettings)> {
    let instance = registry::build(&args.problem, args.alpha, args.p).map_err(usage)?;
    let mut settings = RunSettings::from_instance(&instance, args.alpha, args.p);
    if let Some(scheme) = args.scheme {
        settings.scheme = scheme.into();
    }
    if let Some(t_end) = args.t_end {
        if !t_end.is_finite() || t_end <= 0.0 {
            return Err(usage(format!("--T must be positive and finite, got {t_end}")));
        }
        settings.t_end = t_end;
    }
    settings.plan = match &args.corrections {
        Some(raw) => parse_corrections(raw)?,
        // The flag is the only source of corrections on the command line;
        // the library defaults stay opt-in for programmatic studies.
        None => CorrectionPlan::none(),
    };
    if let Some(tol) = args.picard_tol {
        if !tol.is_finite() || tol <= 0.0 {
            return Err(usage(format!("--picard-tol must be positive, got {tol}")));
        }
        settings.picard_tol = tol;
    }
    if let Some(eps) = args.eps {
        if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
            return Err(usage(format!("--eps must lie in (0, 1), got {eps}")));
        }
        settings.eps = eps;
    }
    if let Some(q) = args.quad_points {
        if q < 2 {
            return Err(usage(format!("--Q must be at least 2, got {q}")));
        }
        settings.quad_points = q;
    }
    Ok((instance, settings))
}

/// Parses `"s1,s2,...;d1,d2,..."` into a symmetric correction plan. A
/// single list corrects both the solution and the force families; `""` and
/// `"none"` disable corrections.
fn parse_corrections(raw: &str) -> Result<CorrectionPlan> {
    let trimmed = raw.trim();
    if trimmed.is_empty() || trimmed == "none" {
        return Ok(CorrectionPlan::none());
    }
    let parts: Vec<&str> = trimmed.split(';').collect();
    if parts.len() > 2 {
        return Err(usage(format!(
            "--corrections expects \"sigmas;deltas\", got '{raw}'"
        )));
    }
    let sigma = parse_power_list(parts[0])?;
    let delta = if parts.len() == 2 {
        parse_power_list(parts[1])?
    } else {
        sigma.clone()
    };
    CorrectionPlan::symmetric(&sigma, &delta).map_err(usage)
}

fn parse_power_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|token| !token.is_empty())
        .map(|token| {
            token
                .parse::<f64>()
                .map_err(|_| usage(format!("invalid correction power '{token}'")))
        })
        .collect()
}

/// Writes through `--out`, or to stdout when absent.
fn with_output<F>(out: Option<&Path>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write(&mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let (instance, settings) = resolve(&args.problem)?;
    // A step size that does not tile the horizon is a flag error, not a
    // solver failure.
    runner::steps_for(settings.t_end, args.h).map_err(|e| usage(format!("{e:#}")))?;
    let trajectory = runner::solve_fast(&instance, &settings, args.h)?;
    let mut manifest = RunManifest::for_solver("solve", instance.name, &settings);
    manifest.h_list = Some(vec![args.h]);
    match args.output.format {
        FormatArg::Csv => {
            with_output(args.output.out.as_deref(), |w| {
                io::write_trajectory_csv(w, &trajectory)
            })?;
            if let Some(path) = &args.output.out {
                io::write_sidecar(path, &manifest)?;
            }
        }
        FormatArg::Json => {
            let doc = TrajectoryDoc::new(&manifest, &trajectory);
            with_output(args.output.out.as_deref(), |w| io::write_json(w, &doc))?;
        }
    }
    Ok(())
}

fn cmd_converge(args: ConvergeArgs) -> Result<()> {
    let (instance, settings) = resolve(&args.problem)?;
    let h_list = match (args.h, args.h_min_exp, args.h_max_exp) {
        (Some(h), None, None) => vec![h],
        (None, Some(min_exp), Some(max_exp)) => {
            if max_exp < min_exp {
                return Err(usage(format!(
                    "--h-max-exp ({max_exp}) must be at least --h-min-exp ({min_exp})"
                )));
            }
            if max_exp > 40 {
                return Err(usage(format!("--h-max-exp ({max_exp}) is out of range")));
            }
            (min_exp..=max_exp).map(|e| 0.5f64.powi(e as i32)).collect()
        }
        // clap's ArgGroup guarantees one of the two forms.
        _ => unreachable!("argument group enforces --h xor the exponent range"),
    };
    for &h in &h_list {
        runner::steps_for(settings.t_end, h).map_err(|e| usage(format!("{e:#}")))?;
    }
    let rows = runner::run_convergence(&instance, &settings, &h_list)?;
    let mut manifest = RunManifest::for_solver("converge", instance.name, &settings);
    manifest.h_list = Some(h_list);
    match args.output.format {
        FormatArg::Csv => {
            with_output(args.output.out.as_deref(), |w| {
                io::write_convergence_csv(w, &rows)
            })?;
            if let Some(path) = &args.output.out {
                io::write_sidecar(path, &manifest)?;
            }
        }
        FormatArg::Json => {
            let doc = ConvergenceDoc { config: &manifest, rows: &rows };
            with_output(args.output.out.as_deref(), |w| io::write_json(w, &doc))?;
        }
    }
    Ok(())
}

fn cmd_stability(args: StabilityArgs) -> Result<()> {
    let query = StabilityQuery {
        alpha: args.alpha,
        p: args.p,
        kappa: args.kappa,
        k_trunc: args.k_trunc,
        n_samples: args.n_samples,
    };
    query.validate().map_err(usage)?;
    let locus = boundary_locus(&query)?;
    let mut manifest = RunManifest::new("stability", args.alpha, args.p);
    manifest.kappa = Some(args.kappa);
    manifest.k_trunc = Some(args.k_trunc);
    manifest.n_samples = Some(args.n_samples);
    match args.output.format {
        FormatArg::Csv => {
            with_output(args.output.out.as_deref(), |w| {
                io::write_stability_csv(w, &locus)
            })?;
            if let Some(path) = &args.output.out {
                io::write_sidecar(path, &manifest)?;
            }
        }
        FormatArg::Json => {
            let doc = StabilityDoc::new(&manifest, &locus);
            with_output(args.output.out.as_deref(), |w| io::write_json(w, &doc))?;
        }
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let (instance, settings) = resolve(&args.problem)?;
    if args.n_max_exp < args.n_min_exp {
        return Err(usage(format!(
            "--n-max-exp ({}) must be at least --n-min-exp ({})",
            args.n_max_exp, args.n_min_exp
        )));
    }
    if args.n_max_exp > 26 {
        return Err(usage(format!("--n-max-exp ({}) is out of range", args.n_max_exp)));
    }
    if args.repeats == 0 {
        return Err(usage("--repeats must be at least 1"));
    }
    let n_list: Vec<usize> = (args.n_min_exp..=args.n_max_exp).map(|e| 1usize << e).collect();
    let rows = runner::run_timing(&instance, &settings, &n_list, args.repeats, args.max_ref_n)?;
    let mut manifest = RunManifest::for_solver("bench", instance.name, &settings);
    manifest.n_list = Some(n_list);
    manifest.repeats = Some(args.repeats);
    manifest.max_ref_n = Some(args.max_ref_n);
    match args.output.format {
        FormatArg::Csv => {
            with_output(args.output.out.as_deref(), |w| io::write_timing_csv(w, &rows))?;
            if let Some(path) = &args.output.out {
                io::write_sidecar(path, &manifest)?;
            }
        }
        FormatArg::Json => {
            let doc = TimingDoc { config: &manifest, rows: &rows };
            with_output(args.output.out.as_deref(), |w| io::write_json(w, &doc))?;
        }
    }
    Ok(())
}

fn cmd_list_problems() -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "{:<10} {:<4} {:<6} {:<10} description", "name", "dim", "T", "errors")?;
    for entry in registry::catalogue() {
        writeln!(
            out,
            "{:<10} {:<4} {:<6} {:<10} {}",
            entry.name,
            entry.dim,
            entry.t_end,
            if entry.has_exact { "exact" } else { "benchmark" },
            entry.summary
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correction_strings_parse_to_symmetric_plans() {
        let plan = parse_corrections("0.3,0.6;0.6,1.3").unwrap();
        assert_eq!(plan.sigma_u(), &[0.3, 0.6]);
        assert_eq!(plan.sigma_hist(), &[0.3, 0.6]);
        assert_eq!(plan.delta_f(), &[0.6, 1.3]);
        assert_eq!(plan.delta_ex(), &[0.6, 1.3]);

        let shared = parse_corrections("0.4, 0.8").unwrap();
        assert_eq!(shared.sigma_u(), &[0.4, 0.8]);
        assert_eq!(shared.delta_f(), &[0.4, 0.8]);

        let sigma_only = parse_corrections("0.4;").unwrap();
        assert_eq!(sigma_only.sigma_u(), &[0.4]);
        assert!(sigma_only.delta_f().is_empty());

        assert!(parse_corrections("none").unwrap().is_empty());
        assert!(parse_corrections("  ").unwrap().is_empty());
        assert!(parse_corrections("a,b").is_err());
        assert!(parse_corrections("1;2;3").is_err());
    }

    #[test]
    fn command_lines_parse() {
        let cli = Cli::try_parse_from([
            "fide", "converge", "--problem", "example1", "--scheme", "famm", "--p", "1",
            "--alpha", "0.5", "--h-min-exp", "3", "--h-max-exp", "7",
        ])
        .unwrap();
        match cli.command {
            Command::Converge(args) => {
                assert_eq!(args.problem.problem, "example1");
                assert_eq!(args.problem.p, 1);
                assert_eq!(args.h_min_exp, Some(3));
                assert_eq!(args.h_max_exp, Some(7));
                assert!(args.h.is_none());
                assert_eq!(args.output.format, FormatArg::Csv);
            }
            other => panic!("parsed {other:?}"),
        }

        assert!(Cli::try_parse_from([
            "fide", "converge", "--problem", "example1", "--alpha", "0.5",
        ])
        .is_err(), "a grid is required");
        assert!(Cli::try_parse_from([
            "fide", "converge", "--problem", "example1", "--alpha", "0.5", "--h", "0.1",
            "--h-min-exp", "3", "--h-max-exp", "5",
        ])
        .is_err(), "grid forms are exclusive");
        assert!(Cli::try_parse_from([
            "fide", "converge", "--problem", "example1", "--alpha", "0.5", "--h-min-exp", "3",
        ])
        .is_err(), "both exponents are required");
    }

    #[test]
    fn usage_errors_carry_the_marker_type() {
        let args = ProblemArgs {
            problem: "missing".into(),
            scheme: None,
            p: 0,
            alpha: 0.5,
            t_end: None,
            corrections: None,
            picard_tol: None,
            eps: None,
            quad_points: None,
        };
        let err = resolve(&args).unwrap_err();
        assert!(err.is::<UsageError>());
        assert!(err.to_string().contains("case3"), "{err}");
    }

    #[test]
    fn flag_overrides_reach_the_settings() {
        let args = ProblemArgs {
            problem: "example2".into(),
            scheme: Some(SchemeArg::Famm),
            p: 1,
            alpha: 0.3,
            t_end: Some(5.0),
            corrections: Some("0.3,0.6;0.6,1.3".into()),
            picard_tol: Some(1e-9),
            eps: Some(1e-8),
            quad_points: Some(48),
        };
        let (instance, settings) = resolve(&args).unwrap();
        assert_eq!(instance.name, "example2");
        assert!(matches!(settings.scheme, Scheme::Famm));
        assert_eq!(settings.t_end, 5.0);
        assert_eq!(settings.picard_tol, 1e-9);
        assert_eq!(settings.eps, 1e-8);
        assert_eq!(settings.quad_points, 48);
        assert_eq!(settings.plan.sigma_u(), &[0.3, 0.6]);

        // Without the flag the command line runs uncorrected.
        let bare = ProblemArgs {
            problem: "example2".into(),
            scheme: None,
            p: 1,
            alpha: 0.3,
            t_end: None,
            corrections: None,
            picard_tol: None,
            eps: None,
            quad_points: None,
        };
        let (_, settings) = resolve(&bare).unwrap();
        assert!(settings.plan.is_empty());
        assert!(matches!(settings.scheme, Scheme::Imex));
        assert_eq!(settings.picard_tol, 5e-7);
    }
}
