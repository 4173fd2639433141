//! Command-line front end: loads a circuit, computes exact outcome weights,
//! samples trials and traces offer and confirmation amplitudes.
//!
//! Commands return an [`Output`] instead of printing, so they can be driven
//! from tests; the binary only prints and exits.

use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use tisim::amplitude::{Amplitude, Weight};
use tisim::circuit::{builtin, parse, BUILTIN_NAMES};
use tisim::propagate::{named_cuts, propagate, PropagateError};
use tisim::transact::{build_mixture, frequency_report, TransactionSet};
use tisim::{CircuitGraph, ExactAmp, Rational};

pub mod report;

pub use report::{Cut, CutTerm, OutcomeRow, Report, Trace, TraceRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tisim", version, about = "Exact simulator for two-particle interferometer networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact outcome weights.
    Exact(CircuitArgs),
    /// Monte Carlo trials compared against the exact weights.
    Run(RunArgs),
    /// Check a circuit file and list every violation.
    Validate { path: PathBuf },
    /// Offer and confirmation amplitudes per outcome, and the state at each cut.
    Trace(CircuitArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Built-in circuit name.
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,
    /// Circuit description file.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CircuitArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Replace the annihilation probability of every interaction region.
    #[arg(long = "p-ann", value_name = "P/Q")]
    pub p_ann: Option<String>,
    #[arg(long, value_enum, default_value_t = Engine::Exact)]
    pub engine: Engine,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub circuit: CircuitArgs,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

/// What a command produced: exit code and the two output streams.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { code: EXIT_OK, stdout, stderr: String::new() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io(_) => EXIT_IO,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(vec![msg.into()])
    }
}

impl From<PropagateError> for CliError {
    fn from(e: PropagateError) -> Self {
        match e {
            PropagateError::Invalid(vs) => CliError::Invalid(vs.iter().map(ToString::to_string).collect()),
            PropagateError::InexactPAnn { .. } => CliError::invalid(e.to_string()),
            PropagateError::UnknownCut { .. } => CliError::invalid(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli.command),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Output { code: EXIT_INVALID, stdout: String::new(), stderr: text }
            } else {
                Output::ok(text)
            }
        }
    }
}

pub fn execute(command: &Command) -> Output {
    let result = match command {
        Command::Exact(args) => cmd_exact(args),
        Command::Run(args) => cmd_run(args),
        Command::Validate { path } => cmd_validate(path),
        Command::Trace(args) => cmd_trace(args),
    };
    result.unwrap_or_else(|e| {
        let mut stderr = e.to_string();
        stderr.push('\n');
        Output { code: e.code(), stdout: String::new(), stderr }
    })
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_file(path: &PathBuf) -> Result<CircuitGraph, CliError> {
    let text = read(path)?;
    parse(&text).map_err(|e| CliError::invalid(format!("ParseError: {}: {e}", path.display())))
}

pub fn parse_p_ann(text: &str) -> Result<Rational, CliError> {
    let p = Rational::from_str(text.trim())
        .map_err(|_| CliError::invalid(format!("ConfigError: --p-ann expects p/q, got '{text}'")))?;
    if p < Rational::from_integer(0.into()) || p > Rational::from_integer(1.into()) {
        return Err(CliError::invalid(format!("ConfigError: --p-ann {text} is outside [0,1]")));
    }
    Ok(p)
}

/// Loads the selected circuit, applies the `p_ann` override and validates.
pub fn load(args: &CircuitArgs) -> Result<(String, CircuitGraph), CliError> {
    let (name, g) = match (&args.source.builtin, &args.source.file) {
        (Some(name), _) => {
            let g = builtin(name).map_err(|_| {
                CliError::invalid(format!("ConfigError: unknown builtin '{name}' (known: {})", BUILTIN_NAMES.join(", ")))
            })?;
            (name.clone(), g)
        }
        (None, Some(path)) => (path.display().to_string(), parse_file(path)?),
        (None, None) => return Err(CliError::invalid("ConfigError: one of --builtin or --file is required")),
    };
    let g = match &args.p_ann {
        Some(text) => g.with_p_ann(&parse_p_ann(text)?),
        None => g,
    };
    let violations = g.validate();
    if !violations.is_empty() {
        return Err(CliError::Invalid(violations.iter().map(ToString::to_string).collect()));
    }
    Ok((name, g))
}

fn mixture<A: Amplitude>(g: &CircuitGraph) -> Result<TransactionSet<A>, CliError> {
    build_mixture(&propagate::<A>(g)?).map_err(internal)
}

fn outcome_rows<A: Amplitude>(ts: &TransactionSet<A>) -> Vec<OutcomeRow> {
    ts.transactions()
        .iter()
        .map(|t| OutcomeRow {
            label: t.outcome.to_string(),
            weight_exact: t.weight.text(),
            weight: t.weight.to_f64(),
            count: None,
            freq: None,
            z: None,
        })
        .collect()
}

fn emit_report(r: &Report, format: Format) -> Result<String, CliError> {
    match format {
        Format::Table => Ok(r.table()),
        Format::Json => r.json().map_err(internal),
        Format::Csv => r.csv().map_err(internal),
    }
}

pub fn exact_report(args: &CircuitArgs) -> Result<Report, CliError> {
    let (circuit, g) = load(args)?;
    let outcomes = match args.engine {
        Engine::Exact => outcome_rows(&mixture::<ExactAmp>(&g)?),
        Engine::Float => outcome_rows(&mixture::<Complex64>(&g)?),
    };
    Ok(Report { circuit, engine: engine_name(args.engine).into(), seed: None, trials: None, rng: None, outcomes })
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Exact => ExactAmp::ENGINE,
        Engine::Float => Complex64::ENGINE,
    }
}

pub fn cmd_exact(args: &CircuitArgs) -> Result<Output, CliError> {
    Ok(Output::ok(emit_report(&exact_report(args)?, args.format)?))
}

fn sampled<A: Amplitude>(g: &CircuitGraph, trials: u64, seed: u64) -> Result<(Vec<OutcomeRow>, String), CliError> {
    let ts = mixture::<A>(g)?;
    let tr = ts.run_trials(trials, seed).map_err(internal)?;
    let rows = frequency_report(&tr, &ts)
        .map_err(internal)?
        .into_iter()
        .map(|r| OutcomeRow {
            label: r.label,
            weight_exact: r.weight_exact,
            weight: r.weight,
            count: Some(r.count),
            freq: Some(r.freq),
            z: Some(r.z),
        })
        .collect();
    Ok((rows, tr.rng))
}

pub fn run_report(args: &RunArgs) -> Result<Report, CliError> {
    let (circuit, g) = load(&args.circuit)?;
    let (outcomes, rng) = match args.circuit.engine {
        Engine::Exact => sampled::<ExactAmp>(&g, args.trials, args.seed)?,
        Engine::Float => sampled::<Complex64>(&g, args.trials, args.seed)?,
    };
    Ok(Report {
        circuit,
        engine: engine_name(args.circuit.engine).into(),
        seed: Some(args.seed),
        trials: Some(args.trials),
        rng: Some(rng),
        outcomes,
    })
}

pub fn cmd_run(args: &RunArgs) -> Result<Output, CliError> {
    Ok(Output::ok(emit_report(&run_report(args)?, args.circuit.format)?))
}

pub fn cmd_validate(path: &PathBuf) -> Result<Output, CliError> {
    let g = parse_file(path)?;
    let violations = g.validate();
    if violations.is_empty() {
        Ok(Output::ok("OK\n".into()))
    } else {
        Err(CliError::Invalid(violations.iter().map(ToString::to_string).collect()))
    }
}

fn traced<A: Amplitude>(g: &CircuitGraph) -> Result<(Vec<TraceRow>, Vec<Cut>), CliError> {
    let ts = mixture::<A>(g)?;
    let rows = ts
        .transactions()
        .iter()
        .map(|t| TraceRow {
            label: t.outcome.to_string(),
            ow: t.ow_amp.text(),
            cw: t.cw_amp.text(),
            weight_exact: t.weight.text(),
            weight: t.weight.to_f64(),
        })
        .collect();
    let cuts = named_cuts::<A>(g)?
        .into_iter()
        .map(|(name, state)| Cut {
            name,
            terms: state
                .terms()
                .map(|(label, amp)| {
                    let inner = label.to_string();
                    let inner = inner.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(&inner);
                    CutTerm { ket: format!("|{inner}⟩"), amplitude: amp.text() }
                })
                .collect(),
        })
        .collect();
    Ok((rows, cuts))
}

pub fn trace_report(args: &CircuitArgs) -> Result<Trace, CliError> {
    let (circuit, g) = load(args)?;
    let (transactions, cuts) = match args.engine {
        Engine::Exact => traced::<ExactAmp>(&g)?,
        Engine::Float => traced::<Complex64>(&g)?,
    };
    Ok(Trace { circuit, engine: engine_name(args.engine).into(), transactions, cuts })
}

pub fn cmd_trace(args: &CircuitArgs) -> Result<Output, CliError> {
    let t = trace_report(args)?;
    let text = match args.format {
        Format::Table => t.table(),
        Format::Json => t.json().map_err(internal)?,
        Format::Csv => t.csv().map_err(internal)?,
    };
    Ok(Output::ok(text))
}
