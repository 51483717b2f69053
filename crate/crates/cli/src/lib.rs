//! Command-line front end: configuration, file formats, reports and the
//! subcommands that drive the `fluxkit` library.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod commands;
pub mod config;
pub mod error;
pub mod files;
pub mod report;

pub use commands::{
    PowerSweepResults, S21Results, ScenarioCurve, SpectrumFitResults, SynthResults, SynthSpectrumEntry,
    SynthTraceEntry, T1Point, TraceFitRecord,
};
pub use config::{ConfigDoc, RunConfig, FORMAT_VERSION};
pub use error::{CliError, CliResult};
pub use report::{FileError, InputHash, Provenance, Report};

#[derive(Debug, Parser)]
#[command(name = "fluxkit", version, about = "Fluxonium spectra, resonator fits and loss budgets")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "fluxkit-out")]
    pub out: PathBuf,
    /// Seed for synthetic data; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Repeat for more log output.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Transition frequencies over a flux scan.
    SimulateSpectrum,
    /// Fit resonator traces.
    FitS21 {
        /// Trace files or directories; replaces `fit_s21.traces`.
        traces: Vec<PathBuf>,
        /// Fit the Duffing nonlinearity.
        #[arg(long)]
        nonlinear: bool,
    },
    /// Fit the power dependence of the internal quality factor.
    FitPowerSweep,
    /// Fit circuit parameters to spectroscopy lines.
    FitSpectrum,
    /// Relaxation-time budget over a flux scan.
    PredictT1,
    /// Write synthetic traces and spectra with their ground truth.
    Synthesize,
    /// Check the configuration and every referenced input.
    Validate,
}

/// Runs one subcommand on a thread pool sized by `--jobs`.
pub fn run(cli: &Cli) -> CliResult<()> {
    let doc = match &cli.config {
        Some(path) => ConfigDoc::load(path)?,
        None => ConfigDoc::empty(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let ctx = commands::Context { doc, out: cli.out.clone(), seed: cli.seed };
    pool.install(|| commands::dispatch(&ctx, &cli.command))
}
