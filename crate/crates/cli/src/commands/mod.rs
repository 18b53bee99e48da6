//! One module per subcommand.

mod density;
mod mobility;
mod simulate;
mod sweep;
mod validate;

use std::path::PathBuf;

pub use validate::{Check, Comparison, ValidationReport};

use crate::config::{CommandKind, ExperimentSpec};
use crate::error::CliResult;
use crate::output::OutputDir;

/// Switches that do not belong in a config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Also write a gnuplot script next to the data.
    pub plot: bool,
    /// Write one row per trial, time and threshold (simulate only).
    pub trial_log: bool,
    /// Score the density histograms against a wrong density (validate only).
    pub corrupt_density: bool,
}

/// Files written and, for checking commands, the checks that failed.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

pub fn run(spec: &ExperimentSpec, opts: &RunOptions) -> CliResult<Outcome> {
    let mut out = OutputDir::create(&spec.out_dir)?;
    let failures = match spec.command {
        CommandKind::Density => density::run(spec, opts, &mut out)?,
        CommandKind::Coverage => sweep::coverage(spec, opts, &mut out)?,
        CommandKind::Rate => sweep::rate(spec, opts, &mut out)?,
        CommandKind::Simulate => simulate::run(spec, opts, &mut out)?,
        CommandKind::Validate => validate::run(spec, opts, &mut out)?,
        CommandKind::CompareMobility => mobility::run(spec, opts, &mut out)?,
    };
    Ok(Outcome {
        files: out.into_files(),
        failures,
    })
}
