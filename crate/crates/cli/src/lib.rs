//! Configuration, sweeps and CSV/JSON output for the `apmc` command.

pub mod commands;
pub mod config;
pub mod output;
pub mod units;

use std::path::Path;
use std::time::Instant;

use commands::{CommandError, RunOutput};
use config::ExperimentConfig;
use output::{write_run, Manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Predict,
    Measure,
    ThresholdSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Predict => "predict",
            Command::Measure => "measure",
            Command::ThresholdSweep => "threshold_sweep",
        }
    }

    pub fn run(self, cfg: &ExperimentConfig) -> Result<RunOutput, CommandError> {
        match self {
            Command::Simulate => commands::simulate(cfg),
            Command::Predict => commands::predict(cfg),
            Command::Measure => commands::measure(cfg),
            Command::ThresholdSweep => commands::threshold_sweep(cfg),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

/// Run `command`, then write its tables and manifest into `dir`.
pub fn execute(command: Command, cfg: &ExperimentConfig, dir: &Path) -> Result<RunOutput, RunError> {
    let start = Instant::now();
    let out = command.run(cfg)?;
    let manifest = Manifest {
        config: cfg,
        seed: cfg.seed,
        ledger: out.ledger.into(),
        elapsed_s: start.elapsed().as_secs_f64(),
        tool_version: output::TOOL_VERSION,
    };
    write_run(dir, command.name(), &out.tables, &manifest)?;
    Ok(out)
}
