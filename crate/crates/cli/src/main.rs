use std::path::PathBuf;
use std::process::ExitCode;

use apmc_cli::commands;
use apmc_cli::config::{self, Overrides, RawConfig};
use apmc_cli::units::{to_si, Dimension, Quantity};
use apmc_cli::{execute, Command};
use apmc_core::absorption::PolicyKind;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "apmc", version, about = "Monte Carlo simulation of diffusive capture by absorbing spheres")]
struct Cli {
    /// TOML experiment file; unset fields fall back to built-in defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    realizations: Option<u64>,
    /// Output directory for CSV files and the run manifest
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// smc, rmc, line or apmc
    #[arg(long, global = true)]
    algorithm: Option<PolicyKind>,
    /// Likelihood threshold below which no uniform variate is drawn
    #[arg(long, global = true)]
    xi: Option<f64>,
    /// Parallel realizations (0 = one per core)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Absorbed fraction versus time for each sweep point
    Simulate,
    /// Predicted one-step RMC accuracy from kappa
    Predict,
    /// Measured one-step accuracy (two samples) per sweep point
    Measure,
    /// Ultimate capture fraction of one of two symmetric receivers
    Asymptote {
        /// Receiver radius, e.g. "40 um" (defaults to scene.radius)
        #[arg(long)]
        radius: Option<String>,
        /// Release point to receiver-center distance (defaults to scene.distance)
        #[arg(long)]
        distance: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Variate counts and accuracy across sweep.xi
    ThresholdSweep,
}

fn length(arg: &Option<String>, default: f64, flag: &str) -> Result<f64, String> {
    match arg {
        None => Ok(default),
        Some(s) => to_si(&Quantity::Text(s.clone()), Dimension::Length).map_err(|e| format!("--{flag}: {e}")),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let raw = match &cli.config {
        Some(path) => config::load(path).map_err(|e| e.to_string())?,
        None => RawConfig::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        realizations: cli.realizations,
        algorithm: cli.algorithm,
        xi: cli.xi,
        workers: cli.workers,
        out: cli.out.clone(),
    };
    let cfg = raw.normalize(&overrides).map_err(|e| e.to_string())?;
    let command = match &cli.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Predict => Command::Predict,
        Cmd::Measure => Command::Measure,
        Cmd::ThresholdSweep => Command::ThresholdSweep,
        Cmd::Asymptote { radius, distance, tol, n_max } => {
            let a = length(radius, cfg.scene.radius, "radius")?;
            let d = length(distance, cfg.scene.distance, "distance")?;
            let r = commands::asymptote(a, d, tol.unwrap_or(cfg.asymptote.tol), n_max.unwrap_or(cfg.asymptote.n_max))
                .map_err(|e| e.to_string())?;
            let report = serde_json::json!({
                "radius": a,
                "distance": d,
                "value": r.value,
                "terms": r.terms,
                "last_term": r.last_term,
                "converged": r.converged,
            });
            let text = serde_json::to_string_pretty(&report).expect("plain json");
            println!("{text}");
            if let Some(dir) = &cfg.out {
                std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
                std::fs::write(dir.join("asymptote.json"), text + "\n").map_err(|e| e.to_string())?;
            }
            if !r.converged {
                eprintln!("series did not converge within {} terms (last term {:e})", r.terms, r.last_term);
                return Ok(ExitCode::from(2));
            }
            return Ok(ExitCode::SUCCESS);
        }
    };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let out = execute(command, &cfg, &dir).map_err(|e| e.to_string())?;
    for (name, table) in &out.tables {
        eprintln!("wrote {} ({} rows)", dir.join(format!("{name}.csv")).display(), table.rows.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
