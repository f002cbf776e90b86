//! Command-line experiments over the `condexp` library. Every command except
//! `graph` produces a [`RunReport`]: the effective configuration, numeric
//! results, and a list of measured-versus-bound checks.

mod amplify;
mod beta;
mod bound;
pub mod num;
pub mod report;
mod spectral;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use num::Num;
pub use report::{Check, CheckKind, RunReport, Table, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] condexp::Error),
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| CliError::Usage(format!("--seed is required for {what}")))
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[derive(Debug, Parser)]
#[command(name = "condexp", version, about = "Tail-bound, expander-walk and amplification experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write the tabular rows of the run as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Second eigenvalue of the Gabber-Galil graphs over a range of m.
    Spectral(SpectralArgs),
    /// Beta-independence of walk projections on a hybrid graph.
    VerifyBeta(VerifyBetaArgs),
    /// Evaluate a conditional-expectation tail bound on an instance.
    Bound(BoundArgs),
    /// Amplification experiment with a planted weak inverter.
    Amplify(AmplifyArgs),
    /// Dump a Gabber-Galil graph as an adjacency list.
    Graph(GraphArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectralArgs {
    #[arg(long, default_value_t = 2)]
    pub m_min: u32,
    #[arg(long, default_value_t = 6)]
    pub m_max: u32,
    /// Eigensolver tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyBetaArgs {
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 3)]
    pub t: usize,
    /// `exact` sweeps every single-set family, `mc` samples only.
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Sampled multi-set families.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InstanceKind {
    /// `t` independent coordinates, `Z` the all-zero indicator with `E[Z] = p`.
    Cube,
    /// `t` independent copies of a random law, random `Z`.
    Iid,
    /// Independent coordinates with different random laws.
    Mixed,
    /// Instance read from `--file`.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundForm {
    /// Identically distributed objects, averaged `W`.
    Averaged,
    /// Arbitrary marginals, per-coordinate thresholds.
    PerCoordinate,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_enum, default_value_t = InstanceKind::Cube)]
    pub instance: InstanceKind,
    #[arg(long, value_enum, default_value_t = BoundForm::Averaged)]
    pub form: BoundForm,
    /// `E[Z]` of the cube instance.
    #[arg(long, default_value = "1/4")]
    pub p: Num,
    #[arg(long, default_value_t = 2)]
    pub t: usize,
    #[arg(long, default_value = "1/10")]
    pub eps: Num,
    #[arg(long, default_value = "1")]
    pub beta: Num,
    /// Codomain size of random laws.
    #[arg(long, default_value_t = 3)]
    pub outcomes: usize,
    /// Number of consecutive seeds for random instances.
    #[arg(long, default_value_t = 1)]
    pub sweep: u64,
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Evaluate in exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AmplifyArgs {
    /// Experiment configuration file; replaces the other experiment flags.
    #[arg(long, conflicts_with_all = ["construction", "n", "m", "t", "k", "delta", "eps", "mode", "trials", "seed"])]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ConstructionArg::Direct)]
    pub construction: ConstructionArg,
    /// Input bits of the base function (direct construction).
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    /// Gabber-Galil family index (walk construction).
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 2)]
    pub t: u32,
    /// Repetitions of the weak inverter.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Failure fraction of the planted inverter.
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConstructionArg {
    Direct,
    Walk,
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    #[arg(long, default_value_t = 2)]
    pub m: u32,
}

/// What a command produced.
#[derive(Debug, Clone)]
pub enum Output {
    Report { report: RunReport, table: Table },
    Text(String),
}

/// Runs one command without writing anything.
pub fn run(command: &Command) -> Result<Output> {
    let start = Instant::now();
    let (mut report, table) = match command {
        Command::Spectral(a) => spectral::run(a)?,
        Command::VerifyBeta(a) => beta::run(a)?,
        Command::Bound(a) => bound::run(a)?,
        Command::Amplify(a) => amplify::run(a)?,
        Command::Graph(a) => return Ok(Output::Text(condexp::spectral::mgg_rotation(a.m)?.adjacency_list())),
    };
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(Output::Report { report, table })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    let (written, path) = match out {
        Some(p) => {
            let mut w = create(p)?;
            (w.write_all(body.as_bytes()).and_then(|_| w.flush()), p.display().to_string())
        }
        None => (io::stdout().lock().write_all(body.as_bytes()), "stdout".to_string()),
    };
    written.map_err(|source| CliError::Io { path, source })
}

/// Runs the parsed command line and writes its outputs. Returns whether every
/// check held.
pub fn execute(cli: &Cli) -> Result<bool> {
    match run(&cli.command)? {
        Output::Text(text) => {
            emit(cli.out.as_deref(), &text)?;
            Ok(true)
        }
        Output::Report { report, table } => {
            let mut body = serde_json::to_string_pretty(&report)?;
            body.push('\n');
            emit(cli.out.as_deref(), &body)?;
            if let Some(path) = &cli.csv {
                table.write(create(path)?)?;
            }
            Ok(report.all_hold)
        }
    }
}
