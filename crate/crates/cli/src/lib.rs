//! Command-line front end: config parsing, analysis orchestration, reports.

pub mod commands;
pub mod config;
pub mod registry;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use report::{Check, Report};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(eqp_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

impl From<eqp_core::Error> for CliError {
    fn from(e: eqp_core::Error) -> Self {
        use eqp_core::Error as E;
        match e {
            E::InvalidInput(_)
            | E::DimensionMismatch { .. }
            | E::NotCptp { .. }
            | E::UnsupportedBase
            | E::TooLarge { .. }
            | E::RationalRotation { .. }
            | E::NotErgodic
            | E::NotAnEigenvalue(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "eqp", version, about = "Peripheral spectra and periodic structure of channel processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Spectral suite for a process config (finite or i.i.d. base).
    Analyze(AnalyzeArgs),
    /// Peripheral structure of a single channel.
    Ehk(EhkArgs),
    /// Trajectory experiments.
    Simulate(ExperimentArgs),
    /// Built-in reproductions.
    Examples(ExperimentArgs),
    /// List the built-in examples.
    List(ListArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Directory for report.json and series.csv.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    #[serde(skip)]
    pub format: Format,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Peripheral tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Number of powers in the Cesaro average.
    #[arg(long, default_value_t = 1 << 26)]
    pub n_avg: u64,
    /// Random probes per check, or orbit samples on an i.i.d. base.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EhkArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Largest power tried by the primitivity test.
    #[arg(long, default_value_t = 1 << 30)]
    pub n_max: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub name: String,
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub d: Option<usize>,
    /// Rotation number.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Cycle length of the decorated-cycle example.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    /// Support size of the i.i.d. example.
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long, default_value_t = 1 << 26)]
    pub n_avg: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Worker count from `EQP_THREADS`, if set and positive.
pub fn thread_cap() -> Option<usize> {
    std::env::var("EQP_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Parse `args`, run the verb and return the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if code == EXIT_PASS { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = match &cli.command {
        Command::List(a) => commands::list(a.format).and_then(|text| {
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
            Ok(EXIT_PASS)
        }),
        cmd => pool.install(|| build_report(cmd)).and_then(|(report, common)| {
            emit(&report, common, stdout)?;
            Ok(if report.passed { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn build_report(cmd: &Command) -> Result<(Report, &Common), CliError> {
    match cmd {
        Command::Analyze(a) => Ok((commands::analyze(a)?, &a.common)),
        Command::Ehk(a) => Ok((commands::ehk(a)?, &a.common)),
        Command::Simulate(a) => Ok((commands::simulate(a)?, &a.common)),
        Command::Examples(a) => Ok((commands::examples(a)?, &a.common)),
        Command::List(_) => unreachable!("handled by the caller"),
    }
}

fn emit(report: &Report, common: &Common, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    if let Some(dir) = &common.out {
        report.write_to(dir)?;
        let verdict = if report.passed { "PASS" } else { "FAIL" };
        writeln!(stdout, "{verdict} {} -> {}", report.command, dir.display()).map_err(io)?;
        return Ok(());
    }
    let text = match common.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv()?,
    };
    stdout.write_all(text.as_bytes()).map_err(io)
}
