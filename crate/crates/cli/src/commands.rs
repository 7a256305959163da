//! Subcommand bodies. Each returns the tables to write plus the summed ledger.

use apmc_core::analytics::{two_rx_asymptote, AnalyticsError, AsymptoteResult};
use apmc_core::engine::{run_batch, EngineError, SceneError};
use apmc_core::metrics::{
    analytic_curve, curve_accuracy, kappa, predict_r2, AccuracyReport, FitOrder, KappaInputs, MetricsError,
};
use apmc_core::stochastic::RvLedger;
use thiserror::Error;

use crate::config::{ExperimentConfig, GridPoint};
use crate::output::{num, Table};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{path}: {message}")]
    Config { path: &'static str, message: String },
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(MetricsError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
}

pub const SIMULATE_FIXED_COLUMNS: [&str; 2] = ["time_s", "analytic_fraction"];
pub const PREDICT_HEADER: [&str; 9] = ["r_r", "r_d", "D", "dt", "kappa", "r2_fit1", "r2_fit2", "r2_fit3", "r2_clamped"];
pub const MEASURE_HEADER: [&str; 9] =
    ["r_r", "r_d", "D", "dt", "kappa", "measured_r2", "measured_rmse", "predicted_r2_clamped", "flag"];
pub const THRESHOLD_HEADER: [&str; 6] = ["xi", "n_uniform", "n_gaussian", "n_total_equivalent", "measured_r2", "flag"];

pub const FLAG_DEGENERATE: &str = "degenerate_variance";

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tables: Vec<(String, Table)>,
    pub ledger: RvLedger,
}

fn single_receiver(cfg: &ExperimentConfig, command: &'static str) -> Result<(), CommandError> {
    let n = if cfg.scene.receiver.is_empty() { cfg.scene.receivers } else { cfg.scene.receiver.len() };
    if n != 1 {
        return Err(CommandError::Config {
            path: "scene.receivers",
            message: format!("{command} compares against the single-receiver analytic curve, got {n} receivers"),
        });
    }
    Ok(())
}

fn kappa_at(p: &GridPoint) -> f64 {
    kappa(&KappaInputs { radius: p.radius, distance: p.distance, diffusion: p.diffusion, dt: p.time_step })
}

/// Sweep points with repeated `xi` values collapsed, for commands that ignore `xi`.
fn geometry_points(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let first_xi = cfg.grid()[0].xi;
    cfg.grid().into_iter().filter(|p| p.xi == first_xi).collect()
}

/// Time series of absorbed fractions: one table per sweep point.
pub fn simulate(cfg: &ExperimentConfig) -> Result<RunOutput, CommandError> {
    let grid = cfg.grid();
    let mut tables = Vec::with_capacity(grid.len());
    let mut ledger = RvLedger::default();
    for (i, p) in grid.iter().enumerate() {
        let scene = cfg.scene_at(p)?;
        let batch = run_batch(&scene, &cfg.policy_at(p), cfg.seed, cfg.realizations, cfg.workers)?;
        ledger += batch.ledger;
        let analytic = analytic_curve(&scene).ok();
        let ids = &batch.curve.receiver_ids;
        let mut header: Vec<String> = SIMULATE_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
        header.extend(ids.iter().map(|id| format!("rx{id}_fraction")));
        header.extend(ids.iter().map(|id| format!("rx{id}_new_absorbed")));
        let mut table = Table::new(header);
        for (j, &t) in batch.curve.times.iter().enumerate() {
            let mut row = vec![num(t), analytic.as_ref().map(|a| num(a[j])).unwrap_or_default()];
            row.extend(batch.curve.fractions.iter().map(|f| num(f[j])));
            row.extend(batch.curve.new_absorbed.iter().map(|f| num(f[j])));
            table.push(row);
        }
        let name = if grid.len() == 1 { "simulate".to_string() } else { format!("simulate_{i:03}") };
        tables.push((name, table));
    }
    Ok(RunOutput { tables, ledger })
}

/// Predicted one-step RMC accuracy from kappa alone.
pub fn predict(cfg: &ExperimentConfig) -> Result<RunOutput, CommandError> {
    let mut table = Table::new(PREDICT_HEADER);
    for p in geometry_points(cfg) {
        let k = kappa_at(&p);
        table.push(vec![
            num(p.radius),
            num(p.distance),
            num(p.diffusion),
            num(p.time_step),
            num(k),
            num(predict_r2(k, FitOrder::Linear)),
            num(predict_r2(k, FitOrder::Quadratic)),
            num(predict_r2(k, FitOrder::Cubic)),
            num(predict_r2(k, FitOrder::ClampedCubic)),
        ]);
    }
    Ok(RunOutput { tables: vec![("predict".into(), table)], ledger: RvLedger::default() })
}

fn report_cells(r: Result<AccuracyReport, MetricsError>) -> Result<(String, String, String), CommandError> {
    match r {
        Ok(r) => Ok((num(r.r_squared), num(r.rmse), String::new())),
        Err(MetricsError::DegenerateVariance) => Ok(("NaN".into(), "NaN".into(), FLAG_DEGENERATE.into())),
        Err(MetricsError::Scene(e)) => Err(e.into()),
        Err(MetricsError::Engine(e)) => Err(e.into()),
        Err(e) => Err(CommandError::Metrics(e)),
    }
}

/// One-step (two-sample) accuracy of the chosen policy at each sweep point.
pub fn measure(cfg: &ExperimentConfig) -> Result<RunOutput, CommandError> {
    single_receiver(cfg, "measure")?;
    let mut table = Table::new(MEASURE_HEADER);
    let mut ledger = RvLedger::default();
    for p in geometry_points(cfg) {
        let scene = cfg.scene_with(&p, 2)?;
        let batch = run_batch(&scene, &cfg.policy_at(&p), cfg.seed, cfg.realizations, cfg.workers)?;
        ledger += batch.ledger;
        let (r2, rmse, flag) = report_cells(curve_accuracy(&scene, &batch.curve))?;
        let k = kappa_at(&p);
        table.push(vec![
            num(p.radius),
            num(p.distance),
            num(p.diffusion),
            num(p.time_step),
            num(k),
            r2,
            rmse,
            num(predict_r2(k, FitOrder::ClampedCubic)),
            flag,
        ]);
    }
    Ok(RunOutput { tables: vec![("measure".into(), table)], ledger })
}

/// Variate counts and whole-curve accuracy across the `xi` axis.
pub fn threshold_sweep(cfg: &ExperimentConfig) -> Result<RunOutput, CommandError> {
    single_receiver(cfg, "threshold-sweep")?;
    let s = &cfg.sweep;
    if s.xi.is_empty() {
        return Err(CommandError::Config { path: "sweep.xi", message: "threshold-sweep needs a list of xi values".into() });
    }
    if !(s.radius.is_empty() && s.distance.is_empty() && s.diffusion.is_empty() && s.time_step.is_empty()) {
        return Err(CommandError::Config { path: "sweep", message: "threshold-sweep only varies xi".into() });
    }
    let mut table = Table::new(THRESHOLD_HEADER);
    let mut ledger = RvLedger::default();
    for p in cfg.grid() {
        let scene = cfg.scene_at(&p)?;
        let batch = run_batch(&scene, &cfg.policy_at(&p), cfg.seed, cfg.realizations, cfg.workers)?;
        ledger += batch.ledger;
        let (r2, _, flag) = report_cells(curve_accuracy(&scene, &batch.curve))?;
        let l = batch.ledger;
        table.push(vec![num(p.xi), l.n_uniform.to_string(), l.n_gaussian.to_string(), num(l.total()), r2, flag]);
    }
    Ok(RunOutput { tables: vec![("threshold_sweep".into(), table)], ledger })
}

/// Ultimate per-receiver capture for the symmetric two-receiver layout.
pub fn asymptote(radius: f64, distance: f64, tol: f64, n_max: usize) -> Result<AsymptoteResult, CommandError> {
    Ok(two_rx_asymptote(radius, distance, tol, n_max)?)
}
