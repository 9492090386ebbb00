//! Command-line front end: reproducible experiments with CSV/JSON emission
//! and run manifests.
//!
//! Every command takes an explicit `--seed` (no silent entropy), writes its
//! data file plus a `manifest.json` into `--out`, and is bit-reproducible
//! from that manifest via `--from-manifest` — independently of `--threads`.

mod commands;
mod manifest;
mod output;

pub use manifest::RunManifest;
pub use output::{fmt_f64, OutputFormat, Table};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::evt::EvtError;
use crate::map::MapError;
use crate::measure::MeasureError;

/// The 13 grid points of the reference experiment.
pub const TABLE1_GRID: [f64; 13] =
    [-0.001, -0.01, -0.1, -0.3, -0.5, -0.7, -1.0, -3.0, -5.0, -8.0, -10.0, -30.0, -50.0];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Evt(#[from] EvtError),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("manifest does not describe a runnable command: {0}")]
    BadManifest(String),
}

#[derive(Debug, Parser)]
#[command(name = "chaotic-extremes", version, about = "Block-maxima extreme value statistics for the quadratic family f_a(x) = 1 - a x^2")]
pub struct Cli {
    /// Re-run a previous command from its manifest.
    #[arg(long, value_name = "FILE")]
    pub from_manifest: Option<PathBuf>,

    /// Output directory for `--from-manifest` re-runs.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Knobs shared by every command.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Map parameter a of f_a(x) = 1 - a x^2.
    #[arg(long, default_value_t = 2.0)]
    pub a: f64,

    /// Critical-region exponent: delta = exp(-delta_exp).
    #[arg(long = "delta-exp", default_value_t = 5)]
    pub delta_exp: u32,

    /// Basic-assumption rate alpha; beta defaults to 14 * alpha.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,

    /// Override the bound-period envelope rate beta.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,

    /// Measure model file to use instead of the built-in choice
    /// (analytic for a = 2, a fresh Birkhoff model otherwise).
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DprimeModeArg {
    Orbit,
    Strict,
    Iid,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reproduce the reference block-maxima table: empirical P{a_n(M_n-1) <= x}
    /// against the limit law H over a grid of x values.
    Table1(Table1Args),
    /// Emit the raw normalized block-maxima sample.
    Maxima(MaximaArgs),
    /// Anti-clustering D'(u_n) estimates over a list of lag divisors k.
    Dprime(DprimeArgs),
    /// Indicator autocovariance of the exceedance set at lags 0..j_max.
    Corr(CorrArgs),
    /// Return-depth histogram at a stationary instant.
    Depth(DepthArgs),
    /// Build and export an empirical measure model.
    Measure(MeasureArgs),
    /// Finite-horizon check of the exponential-growth and basic-assumption
    /// conditions.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Block length n.
    #[arg(long, default_value_t = 1000)]
    pub n: u64,
    /// Sample size m (number of replicas).
    #[arg(long, default_value_t = 10_000)]
    pub m: u64,
    #[arg(long)]
    pub seed: u64,
    /// Evaluation grid (defaults to the reference 13 x values).
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Pin every knob to the reference experiment (a = 2, default grid).
    #[arg(long)]
    pub paper_defaults: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct MaximaArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct DprimeArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Lag divisors, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [5u64, 10, 20])]
    pub k: Vec<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DprimeModeArg::Orbit)]
    pub mode: DprimeModeArg,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    /// Block length fixing the level u_n.
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long = "j-max", default_value_t = 40)]
    pub j_max: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long = "theta-min", default_value_t = 5)]
    pub theta_min: u32,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// The sampled instant is uniform in [0, horizon].
    #[arg(long, default_value_t = 64)]
    pub horizon: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Number of Birkhoff samples.
    #[arg(long = "N")]
    pub n_samples: u64,
    #[arg(long = "burn-in", default_value_t = 1000)]
    pub burn_in: u64,
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Horizon N for the per-n margins.
    #[arg(long = "N", default_value_t = 100)]
    pub horizon: u64,
    /// Exponential-growth rate c (default ln 2).
    #[arg(long)]
    pub c: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Runs a parsed invocation. Errors map to exit code 1 in `main`; clap's own
/// usage errors exit with 2.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(path) = cli.from_manifest {
        let manifest = RunManifest::load(&path)?;
        return commands::run_from_manifest(&manifest, &cli.out);
    }
    match cli.command {
        Some(Command::Table1(args)) => commands::cmd_table1(&args),
        Some(Command::Maxima(args)) => commands::cmd_maxima(&args),
        Some(Command::Dprime(args)) => commands::cmd_dprime(&args),
        Some(Command::Corr(args)) => commands::cmd_corr(&args),
        Some(Command::Depth(args)) => commands::cmd_depth(&args),
        Some(Command::Measure(args)) => commands::cmd_measure(&args),
        Some(Command::Verify(args)) => commands::cmd_verify(&args),
        None => Err(CliError::BadManifest("no command given; see --help".into())),
    }
}
