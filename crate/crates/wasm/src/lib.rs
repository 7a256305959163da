//! Browser bindings. Each export takes plain numbers in display units
//! (µm, µm^2/s, s) and returns a JSON string; `www/index.html` plots it.
//!
//! The `*_json` functions are the testable core of each export and run on
//! any target.

use apmc_core::analytics::two_rx_asymptote;
use apmc_core::metrics::{analytic_curve, kappa, predict_r2, r_squared, rmse, FitOrder, KappaInputs};
use apmc_core::{run_batch_serial, AbsorptionPolicy, PolicyKind, Scene};
use serde::Serialize;
use wasm_bindgen::prelude::*;

// divide by exact powers of ten so 20 µm is bit-identical to 20e-6 m
const PER_UM: f64 = 1e6;
const PER_UM2: f64 = 1e12;

/// Keeps one click under a few seconds in the browser.
pub const MAX_MOLECULE_STEPS: u64 = 40_000_000;

pub const ASYMPTOTE_TOL: f64 = 1e-12;
pub const ASYMPTOTE_N_MAX: usize = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutput {
    pub algorithm: String,
    pub times: Vec<f64>,
    /// Present for single-receiver scenes only.
    pub analytic: Option<Vec<f64>>,
    pub receiver_ids: Vec<usize>,
    pub fractions: Vec<Vec<f64>>,
    pub r_squared: Option<f64>,
    pub rmse: Option<f64>,
    pub kappa: f64,
    pub n_uniform: u64,
    pub n_gaussian: u64,
    pub n_total_equivalent: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PredictOutput {
    pub kappa: f64,
    pub r2_fit1: f64,
    pub r2_fit2: f64,
    pub r2_fit3: f64,
    pub r2_clamped: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SimulateRequest<'a> {
    pub algorithm: &'a str,
    pub receivers: usize,
    pub radius_um: f64,
    pub distance_um: f64,
    pub diffusion_um2_s: f64,
    pub dt_s: f64,
    pub samples: usize,
    pub molecules: usize,
    pub realizations: u64,
    pub xi: f64,
    pub seed: u64,
}

pub fn simulate_json(req: &SimulateRequest) -> Result<String, String> {
    let kind: PolicyKind = req.algorithm.parse().map_err(|e: apmc_core::PolicyError| e.to_string())?;
    let policy = AbsorptionPolicy::new(kind, req.xi).map_err(|e| e.to_string())?;
    if !matches!(req.receivers, 1 | 2 | 4) {
        return Err(format!("receivers must be 1, 2 or 4, got {}", req.receivers));
    }
    let work = req.molecules as u64 * req.samples as u64 * req.realizations;
    if work > MAX_MOLECULE_STEPS {
        return Err(format!(
            "molecules x samples x realizations = {work} exceeds the in-browser limit of {MAX_MOLECULE_STEPS}"
        ));
    }
    let (a, d, diffusion) = (req.radius_um / PER_UM, req.distance_um / PER_UM, req.diffusion_um2_s / PER_UM2);
    let scene = if req.receivers == 1 {
        Scene::single(a, d, diffusion, req.dt_s, req.samples, req.molecules)
    } else {
        Scene::symmetric(req.receivers, a, d, diffusion, req.dt_s, req.samples, req.molecules)
    }
    .map_err(|e| e.to_string())?;
    let batch = run_batch_serial(&scene, &policy, req.seed, req.realizations).map_err(|e| e.to_string())?;

    let analytic = analytic_curve(&scene).ok();
    let (r2, err) = match &analytic {
        Some(reference) => {
            let sim = &batch.curve.fractions[0];
            (r_squared(reference, sim).ok(), rmse(reference, sim).ok())
        }
        None => (None, None),
    };
    let out = SimulateOutput {
        algorithm: kind.name().to_string(),
        times: batch.curve.times,
        analytic,
        receiver_ids: batch.curve.receiver_ids,
        fractions: batch.curve.fractions,
        r_squared: r2,
        rmse: err,
        kappa: kappa(&KappaInputs { radius: a, distance: d, diffusion, dt: req.dt_s }),
        n_uniform: batch.ledger.n_uniform,
        n_gaussian: batch.ledger.n_gaussian,
        n_total_equivalent: batch.ledger.total(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn predict(radius_um: f64, distance_um: f64, diffusion_um2_s: f64, dt_s: f64) -> Result<PredictOutput, String> {
    for (name, v) in [("radius", radius_um), ("distance", distance_um), ("diffusion", diffusion_um2_s), ("time step", dt_s)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("{name} must be positive, got {v}"));
        }
    }
    let k = kappa(&KappaInputs {
        radius: radius_um / PER_UM,
        distance: distance_um / PER_UM,
        diffusion: diffusion_um2_s / PER_UM2,
        dt: dt_s,
    });
    Ok(PredictOutput {
        kappa: k,
        r2_fit1: predict_r2(k, FitOrder::Linear),
        r2_fit2: predict_r2(k, FitOrder::Quadratic),
        r2_fit3: predict_r2(k, FitOrder::Cubic),
        r2_clamped: predict_r2(k, FitOrder::ClampedCubic),
    })
}

pub fn predict_json(radius_um: f64, distance_um: f64, diffusion_um2_s: f64, dt_s: f64) -> Result<String, String> {
    let p = predict(radius_um, distance_um, diffusion_um2_s, dt_s)?;
    serde_json::to_string(&p).map_err(|e| e.to_string())
}

/// Predictions at `points` log-spaced time steps in `[dt_min, dt_max]`.
pub fn predict_curve_json(
    radius_um: f64,
    distance_um: f64,
    diffusion_um2_s: f64,
    dt_min: f64,
    dt_max: f64,
    points: usize,
) -> Result<String, String> {
    if !(dt_min > 0.0 && dt_max > dt_min) || points < 2 {
        return Err("need 0 < dt_min < dt_max and at least 2 points".into());
    }
    let ratio = (dt_max / dt_min).ln() / (points - 1) as f64;
    let rows = (0..points)
        .map(|i| {
            let dt = dt_min * (ratio * i as f64).exp();
            predict(radius_um, distance_um, diffusion_um2_s, dt).map(|p| (dt, p))
        })
        .collect::<Result<Vec<_>, _>>()?;
    #[derive(Serialize)]
    struct Row {
        dt: f64,
        #[serde(flatten)]
        p: PredictOutput,
    }
    let rows: Vec<Row> = rows.into_iter().map(|(dt, p)| Row { dt, p }).collect();
    serde_json::to_string(&rows).map_err(|e| e.to_string())
}

pub fn asymptote_json(radius_um: f64, distance_um: f64) -> Result<String, String> {
    let r = two_rx_asymptote(radius_um / PER_UM, distance_um / PER_UM, ASYMPTOTE_TOL, ASYMPTOTE_N_MAX)
        .map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    algorithm: &str,
    receivers: usize,
    radius_um: f64,
    distance_um: f64,
    diffusion_um2_s: f64,
    dt_s: f64,
    samples: usize,
    molecules: usize,
    realizations: u32,
    xi: f64,
    seed: u32,
) -> Result<String, JsError> {
    let req = SimulateRequest {
        algorithm,
        receivers,
        radius_um,
        distance_um,
        diffusion_um2_s,
        dt_s,
        samples,
        molecules,
        realizations: realizations as u64,
        xi,
        seed: seed as u64,
    };
    simulate_json(&req).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = predictAccuracy)]
pub fn predict_accuracy(
    radius_um: f64,
    distance_um: f64,
    diffusion_um2_s: f64,
    dt_min: f64,
    dt_max: f64,
    points: usize,
) -> Result<String, JsError> {
    predict_curve_json(radius_um, distance_um, diffusion_um2_s, dt_min, dt_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = twoReceiverAsymptote)]
pub fn two_receiver_asymptote(radius_um: f64, distance_um: f64) -> Result<String, JsError> {
    asymptote_json(radius_um, distance_um).map_err(|e| JsError::new(&e))
}
