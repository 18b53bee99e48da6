//! Command-line experiments for drone base-station networks.
//!
//! `dronesim <command> [--config FILE] [--preset fig3|fig4|fig5] [--seed N]
//! [--trials N] [--out DIR] [--no-noise] [--plot]`
//!
//! Exit codes: 0 on success, 1 when a run fails or a check does not hold,
//! 2 for configuration and usage errors.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::Parser;

pub use commands::{Outcome, RunOptions};
pub use config::{CommandKind, ConfigFile, ExperimentSpec, Overrides, Preset};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dronesim", version, about = "Coverage and rate of mobile drone base-station networks")]
pub struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    pub command: CommandKind,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter preset; config file values override it.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Master seed for Monte Carlo commands.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Evaluate with N0 = 0 only.
    #[arg(long)]
    pub no_noise: bool,
    /// Also write a gnuplot script.
    #[arg(long)]
    pub plot: bool,
    /// Write per-trial SINR rows (simulate).
    #[arg(long)]
    pub trial_log: bool,
    /// Negative control for validate: score histograms against a wrong density.
    #[arg(long, hide = true)]
    pub corrupt_density: bool,
}

impl Cli {
    pub fn spec(&self) -> CliResult<ExperimentSpec> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let overrides = Overrides {
            preset: self.preset,
            seed: self.seed,
            trials: self.trials,
            no_noise: self.no_noise,
        };
        ExperimentSpec::resolve(self.command, file, &overrides, self.out.clone())
    }

    pub fn options(&self) -> RunOptions {
        RunOptions {
            plot: self.plot,
            trial_log: self.trial_log,
            corrupt_density: self.corrupt_density,
        }
    }
}

/// Resolves the configuration and runs the command.
pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let spec = cli.spec()?;
    commands::run(&spec, &cli.options())
}
