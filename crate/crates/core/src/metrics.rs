//! Accuracy and complexity metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorption::AbsorptionPolicy;
use crate::analytics::{capture_unchecked, ChannelParams};
use crate::engine::{run_batch, EngineError, FractionCurve, Scene, SceneError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("simulated series has zero variance but differs from the reference")]
    DegenerateVariance,
    #[error("analytic reference needs a single-receiver scene")]
    NoAnalyticReference,
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub r_squared: f64,
    pub rmse: f64,
    pub samples: usize,
}

fn check_lengths(analytic: &[f64], simulated: &[f64], needed: usize) -> Result<(), MetricsError> {
    if analytic.len() != simulated.len() {
        return Err(MetricsError::LengthMismatch(analytic.len(), simulated.len()));
    }
    if simulated.len() < needed {
        return Err(MetricsError::TooShort { needed, got: simulated.len() });
    }
    Ok(())
}

/// Coefficient of determination of `simulated` against `analytic`, with the
/// simulated series' own mean in the denominator.
pub fn r_squared(analytic: &[f64], simulated: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(analytic, simulated, 2)?;
    let mean = simulated.iter().sum::<f64>() / simulated.len() as f64;
    let residual: f64 = analytic.iter().zip(simulated).map(|(a, s)| (a - s).powi(2)).sum();
    let spread: f64 = simulated.iter().map(|s| (s - mean).powi(2)).sum();
    match (residual == 0.0, spread == 0.0) {
        (true, _) => Ok(1.0),
        (false, true) => Err(MetricsError::DegenerateVariance),
        (false, false) => Ok(1.0 - residual / spread),
    }
}

pub fn rmse(analytic: &[f64], simulated: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(analytic, simulated, 1)?;
    let sum: f64 = analytic.iter().zip(simulated).map(|(a, s)| (a - s).powi(2)).sum();
    Ok((sum / simulated.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaInputs {
    /// receiver radius, m
    pub radius: f64,
    /// release distance to receiver center, m
    pub distance: f64,
    /// m^2/s
    pub diffusion: f64,
    /// s
    pub dt: f64,
}

impl From<&ChannelParams> for KappaInputs {
    fn from(p: &ChannelParams) -> Self {
        Self { radius: p.radius, distance: p.distance, diffusion: p.diffusion, dt: p.dt }
    }
}

/// Dimensionless step-size predictor `r_r (r_d D dt)^(-1/3)`.
pub fn kappa(inputs: &KappaInputs) -> f64 {
    inputs.radius / (inputs.distance * inputs.diffusion * inputs.dt).cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitOrder {
    Linear,
    Quadratic,
    Cubic,
    /// Cubic on `[0.0726, 0.612]`, 0 below, 1 above.
    ClampedCubic,
}

pub const CLAMP_LOW: f64 = 0.0726;
pub const CLAMP_HIGH: f64 = 0.612;

/// Predicted one-step RMC accuracy (R^2) as a polynomial in kappa.
pub fn predict_r2(kappa: f64, order: FitOrder) -> f64 {
    let k = kappa;
    match order {
        FitOrder::Linear => (101.0 * k + 47.0) / 100.0,
        FitOrder::Quadratic => (-372.0 * k * k + 392.0 * k - 3.0) / 100.0,
        FitOrder::Cubic => (((979.0 * k - 1523.0) * k + 813.0) * k - 51.0) / 100.0,
        FitOrder::ClampedCubic => {
            if k < CLAMP_LOW {
                0.0
            } else if k <= CLAMP_HIGH {
                predict_r2(k, FitOrder::Cubic)
            } else {
                1.0
            }
        }
    }
}

/// `hitting_fraction` at each sample time of a single-receiver scene.
pub fn analytic_curve(scene: &Scene) -> Result<Vec<f64>, MetricsError> {
    let [rx] = scene.receivers.as_slice() else {
        return Err(MetricsError::NoAnalyticReference);
    };
    let d = rx.center_distance(scene.transmitter);
    Ok(scene.times().iter().map(|&t| capture_unchecked(rx.radius, d, scene.diffusion, t)).collect())
}

/// R^2 and RMSE of a whole single-receiver curve against the analytic one.
pub fn curve_accuracy(scene: &Scene, curve: &FractionCurve) -> Result<AccuracyReport, MetricsError> {
    let analytic = analytic_curve(scene)?;
    let simulated = &curve.fractions[0];
    Ok(AccuracyReport {
        r_squared: r_squared(&analytic, simulated)?,
        rmse: rmse(&analytic, simulated)?,
        samples: simulated.len(),
    })
}

/// Simulate exactly one step and score the two samples `(0, Pr(dt))` against
/// the analytic pair.
pub fn measure_one_step_accuracy(
    params: &ChannelParams,
    policy: &AbsorptionPolicy,
    seed: u64,
    realizations: u64,
    workers: usize,
) -> Result<AccuracyReport, MetricsError> {
    let scene = Scene::single(params.radius, params.distance, params.diffusion, params.dt, 2, params.molecules)?;
    let batch = run_batch(&scene, policy, seed, realizations, workers)?;
    curve_accuracy(&scene, &batch.curve)
}
