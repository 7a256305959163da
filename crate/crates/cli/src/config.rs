//! Experiment configuration: TOML on disk, SI everywhere after `normalize`.

use std::path::{Path, PathBuf};

use apmc_core::absorption::{AbsorptionPolicy, PolicyKind};
use apmc_core::engine::{Scene, SceneError};
use apmc_core::geometry::{SphereReceiver, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{to_si, Dimension, Quantity};

pub const DEFAULT_MOLECULES: usize = 100_000;
pub const DEFAULT_REALIZATIONS: u64 = 20;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub seed: Option<u64>,
    pub realizations: Option<u64>,
    pub algorithm: Option<String>,
    pub xi: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub scene: RawScene,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub asymptote: RawAsymptote,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScene {
    pub diffusion: Option<Quantity>,
    pub radius: Option<Quantity>,
    pub distance: Option<Quantity>,
    pub time_step: Option<Quantity>,
    pub samples: Option<usize>,
    pub molecules: Option<usize>,
    /// 1, 2 or 4 identical receivers placed along the axes.
    pub receivers: Option<usize>,
    pub transmitter: Option<[Quantity; 3]>,
    /// Explicit receiver list; replaces `radius`, `distance` and `receivers`.
    #[serde(default)]
    pub receiver: Vec<RawReceiver>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawReceiver {
    pub center: [Quantity; 3],
    pub radius: Quantity,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    #[serde(default)]
    pub radius: Vec<Quantity>,
    #[serde(default)]
    pub distance: Vec<Quantity>,
    #[serde(default)]
    pub diffusion: Vec<Quantity>,
    #[serde(default)]
    pub time_step: Vec<Quantity>,
    #[serde(default)]
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAsymptote {
    pub tol: Option<f64>,
    pub n_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverConfig {
    pub center: [f64; 3],
    pub radius: f64,
}

/// Base scene, all SI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneConfig {
    pub diffusion: f64,
    pub radius: f64,
    pub distance: f64,
    pub time_step: f64,
    pub samples: usize,
    pub molecules: usize,
    pub receivers: usize,
    pub transmitter: [f64; 3],
    pub receiver: Vec<ReceiverConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SweepConfig {
    pub radius: Vec<f64>,
    pub distance: Vec<f64>,
    pub diffusion: Vec<f64>,
    pub time_step: Vec<f64>,
    pub xi: Vec<f64>,
}

impl SweepConfig {
    pub fn is_empty(&self) -> bool {
        self.radius.is_empty()
            && self.distance.is_empty()
            && self.diffusion.is_empty()
            && self.time_step.is_empty()
            && self.xi.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteConfig {
    pub tol: f64,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub realizations: u64,
    pub algorithm: PolicyKind,
    pub xi: f64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub scene: SceneConfig,
    pub sweep: SweepConfig,
    pub asymptote: AsymptoteConfig,
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub radius: f64,
    pub distance: f64,
    pub diffusion: f64,
    pub time_step: f64,
    pub xi: f64,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub realizations: Option<u64>,
    pub algorithm: Option<PolicyKind>,
    pub xi: Option<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn load(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
    parse(&text).map_err(|e| match e {
        ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.to_owned(), message },
        other => other,
    })
}

pub fn parse(text: &str) -> Result<RawConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse { path: PathBuf::from("<config>"), message: e.to_string() })
}

fn quantity(q: &Option<Quantity>, default: f64, dim: Dimension, path: &str) -> Result<f64, ConfigError> {
    match q {
        None => Ok(default),
        Some(q) => to_si(q, dim).map_err(|m| field(path, m)),
    }
}

fn quantities(qs: &[Quantity], dim: Dimension, path: &str) -> Result<Vec<f64>, ConfigError> {
    qs.iter()
        .enumerate()
        .map(|(i, q)| to_si(q, dim).map_err(|m| field(format!("{path}[{i}]"), m)))
        .collect()
}

fn vector(qs: &[Quantity; 3], path: &str) -> Result<[f64; 3], ConfigError> {
    let v = quantities(qs, Dimension::Length, path)?;
    Ok([v[0], v[1], v[2]])
}

impl RawConfig {
    pub fn normalize(&self, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
        let s = &self.scene;
        let algorithm = match (&overrides.algorithm, &self.algorithm) {
            (Some(k), _) => *k,
            (None, Some(name)) => name.parse().map_err(|e: apmc_core::absorption::PolicyError| field("algorithm", e.to_string()))?,
            (None, None) => PolicyKind::Apmc,
        };
        let scene = SceneConfig {
            diffusion: quantity(&s.diffusion, 1e-9, Dimension::Diffusivity, "scene.diffusion")?,
            radius: quantity(&s.radius, 10e-6, Dimension::Length, "scene.radius")?,
            distance: quantity(&s.distance, 50e-6, Dimension::Length, "scene.distance")?,
            time_step: quantity(&s.time_step, 0.1, Dimension::Time, "scene.time_step")?,
            samples: s.samples.unwrap_or(100),
            molecules: s.molecules.unwrap_or(DEFAULT_MOLECULES),
            receivers: s.receivers.unwrap_or(1),
            transmitter: match &s.transmitter {
                Some(t) => vector(t, "scene.transmitter")?,
                None => [0.0; 3],
            },
            receiver: s
                .receiver
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    Ok(ReceiverConfig {
                        center: vector(&r.center, &format!("scene.receiver[{i}].center"))?,
                        radius: to_si(&r.radius, Dimension::Length).map_err(|m| field(format!("scene.receiver[{i}].radius"), m))?,
                    })
                })
                .collect::<Result<_, ConfigError>>()?,
        };
        let sweep = SweepConfig {
            radius: quantities(&self.sweep.radius, Dimension::Length, "sweep.radius")?,
            distance: quantities(&self.sweep.distance, Dimension::Length, "sweep.distance")?,
            diffusion: quantities(&self.sweep.diffusion, Dimension::Diffusivity, "sweep.diffusion")?,
            time_step: quantities(&self.sweep.time_step, Dimension::Time, "sweep.time_step")?,
            xi: self.sweep.xi.clone(),
        };
        let cfg = ExperimentConfig {
            seed: overrides.seed.or(self.seed).unwrap_or(1),
            realizations: overrides.realizations.or(self.realizations).unwrap_or(DEFAULT_REALIZATIONS),
            algorithm,
            xi: overrides.xi.or(self.xi).unwrap_or(0.0),
            workers: overrides.workers.or(self.workers).unwrap_or(0),
            out: overrides.out.clone().or_else(|| self.out.clone()),
            scene,
            sweep,
            asymptote: AsymptoteConfig {
                tol: self.asymptote.tol.unwrap_or(1e-12),
                n_max: self.asymptote.n_max.unwrap_or(100_000),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn scene_error_path(e: &SceneError) -> &'static str {
    match e {
        SceneError::Diffusion(_) => "scene.diffusion",
        SceneError::TimeStep(_) => "scene.time_step",
        SceneError::Samples(_) => "scene.samples",
        SceneError::Molecules => "scene.molecules",
        SceneError::NoReceivers => "scene.receivers",
        SceneError::Transmitter => "scene.transmitter",
        SceneError::Receiver(_) | SceneError::DuplicateId(_) | SceneError::Overlap(..) => "scene.receiver",
        SceneError::TransmitterInside(_) => "scene.distance",
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.realizations == 0 {
            return Err(field("realizations", "must be at least 1"));
        }
        if !matches!(self.scene.receivers, 1 | 2 | 4) {
            return Err(field("scene.receivers", format!("expected 1, 2 or 4, got {}", self.scene.receivers)));
        }
        if !self.scene.receiver.is_empty() && !(self.sweep.radius.is_empty() && self.sweep.distance.is_empty()) {
            return Err(field("sweep", "radius/distance sweeps need the symmetric layout, not scene.receiver"));
        }
        if !(self.asymptote.tol > 0.0) {
            return Err(field("asymptote.tol", "must be positive"));
        }
        for (i, p) in self.grid().iter().enumerate() {
            let at = |name: &str| if self.sweep.is_empty() { name.to_string() } else { format!("{name} (grid point {i})") };
            AbsorptionPolicy::new(self.algorithm, p.xi).map_err(|e| field(at("xi"), e.to_string()))?;
            self.scene_at(p).map_err(|e| field(at(scene_error_path(&e)), e.to_string()))?;
        }
        Ok(())
    }

    /// Cartesian product of the sweep axes; an empty axis takes the base value.
    /// `xi` varies fastest, then `time_step`, `diffusion`, `distance`, `radius`.
    pub fn grid(&self) -> Vec<GridPoint> {
        let or_base = |axis: &Vec<f64>, base: f64| if axis.is_empty() { vec![base] } else { axis.clone() };
        let s = &self.scene;
        let mut points = Vec::new();
        for &radius in &or_base(&self.sweep.radius, s.radius) {
            for &distance in &or_base(&self.sweep.distance, s.distance) {
                for &diffusion in &or_base(&self.sweep.diffusion, s.diffusion) {
                    for &time_step in &or_base(&self.sweep.time_step, s.time_step) {
                        for &xi in &or_base(&self.sweep.xi, self.xi) {
                            points.push(GridPoint { radius, distance, diffusion, time_step, xi });
                        }
                    }
                }
            }
        }
        points
    }

    pub fn scene_at(&self, p: &GridPoint) -> Result<Scene, SceneError> {
        self.scene_with(p, self.scene.samples)
    }

    pub fn scene_with(&self, p: &GridPoint, samples: usize) -> Result<Scene, SceneError> {
        let s = &self.scene;
        if s.receiver.is_empty() {
            let mut scene = Scene::symmetric(s.receivers, p.radius, p.distance, p.diffusion, p.time_step, samples, s.molecules)?;
            if s.transmitter != [0.0; 3] {
                let t = Vector3::new(s.transmitter[0], s.transmitter[1], s.transmitter[2]);
                for rx in &mut scene.receivers {
                    rx.center += t;
                }
                scene.transmitter = t;
                scene.validate()?;
            }
            Ok(scene)
        } else {
            let receivers = s
                .receiver
                .iter()
                .enumerate()
                .map(|(i, r)| SphereReceiver { id: i + 1, center: Vector3::new(r.center[0], r.center[1], r.center[2]), radius: r.radius })
                .collect();
            let t = Vector3::new(s.transmitter[0], s.transmitter[1], s.transmitter[2]);
            Scene::new(p.diffusion, p.time_step, samples, s.molecules, t, receivers)
        }
    }

    pub fn policy_at(&self, p: &GridPoint) -> AbsorptionPolicy {
        AbsorptionPolicy::new(self.algorithm, p.xi).expect("validated")
    }
}
