//! Time stepping, molecule bookkeeping and realization batches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorption::{
    decide_apmc_preliminary, decide_line, decide_rmc, decide_smc, AbsorptionPolicy, PolicyKind,
};
use crate::geometry::{is_inside, SphereReceiver, Vector3};
use crate::stochastic::{sample_displacement, RngStream, RvLedger};

/// Re-propagation attempts allowed per molecule per APMC step.
pub const APMC_RETRY_CAP: u32 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("diffusion coefficient must be positive, got {0}")]
    Diffusion(f64),
    #[error("time step must be positive, got {0}")]
    TimeStep(f64),
    #[error("need at least 2 samples, got {0}")]
    Samples(usize),
    #[error("need at least one molecule")]
    Molecules,
    #[error("need at least one receiver")]
    NoReceivers,
    #[error("transmitter position is not finite")]
    Transmitter,
    #[error("receiver {0} has a non-positive radius or non-finite center")]
    Receiver(usize),
    #[error("duplicate receiver id {0}")]
    DuplicateId(usize),
    #[error("receivers {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("transmitter is not strictly outside receiver {0}")]
    TransmitterInside(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("molecule {molecule} landed inside a receiver {attempts} times in a row at step {step}")]
    RetryCapExceeded { molecule: usize, step: usize, attempts: u32 },
    #[error("realization {realization}: {source}")]
    Realization { realization: u64, source: Box<EngineError> },
    #[error("need at least one realization")]
    NoRealizations,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Simulation environment: free diffusion plus absorbing spheres, with an
/// instantaneous point release at `transmitter` at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    /// m^2/s
    pub diffusion: f64,
    /// s
    pub dt: f64,
    /// Number of samples including `t = 0`; `samples - 1` steps are simulated.
    pub samples: usize,
    pub molecules: usize,
    pub transmitter: Vector3,
    pub receivers: Vec<SphereReceiver>,
}

impl Scene {
    pub fn new(
        diffusion: f64,
        dt: f64,
        samples: usize,
        molecules: usize,
        transmitter: Vector3,
        receivers: Vec<SphereReceiver>,
    ) -> Result<Self, SceneError> {
        let scene = Self { diffusion, dt, samples, molecules, transmitter, receivers };
        scene.validate()?;
        Ok(scene)
    }

    /// One receiver of radius `radius` centered at `(distance, 0, 0)`, release at the origin.
    pub fn single(
        radius: f64,
        distance: f64,
        diffusion: f64,
        dt: f64,
        samples: usize,
        molecules: usize,
    ) -> Result<Self, SceneError> {
        let rx = SphereReceiver { id: 1, center: Vector3::new(distance, 0.0, 0.0), radius };
        Self::new(diffusion, dt, samples, molecules, Vector3::ZERO, vec![rx])
    }

    /// `count` receivers (2 or 4) at distance `distance` along `+x, -x, +y, -y`.
    pub fn symmetric(
        count: usize,
        radius: f64,
        distance: f64,
        diffusion: f64,
        dt: f64,
        samples: usize,
        molecules: usize,
    ) -> Result<Self, SceneError> {
        let axes = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
        let receivers = axes
            .iter()
            .take(count.min(4))
            .enumerate()
            .map(|(i, &(x, y))| SphereReceiver {
                id: i + 1,
                center: Vector3::new(x * distance, y * distance, 0.0),
                radius,
            })
            .collect();
        Self::new(diffusion, dt, samples, molecules, Vector3::ZERO, receivers)
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.diffusion > 0.0 && self.diffusion.is_finite()) {
            return Err(SceneError::Diffusion(self.diffusion));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SceneError::TimeStep(self.dt));
        }
        if self.samples < 2 {
            return Err(SceneError::Samples(self.samples));
        }
        if self.molecules == 0 {
            return Err(SceneError::Molecules);
        }
        if self.receivers.is_empty() {
            return Err(SceneError::NoReceivers);
        }
        if !self.transmitter.is_finite() {
            return Err(SceneError::Transmitter);
        }
        for (i, rx) in self.receivers.iter().enumerate() {
            if SphereReceiver::new(rx.id, rx.center, rx.radius).is_none() {
                return Err(SceneError::Receiver(rx.id));
            }
            if rx.center_distance(self.transmitter) <= rx.radius {
                return Err(SceneError::TransmitterInside(rx.id));
            }
            for other in &self.receivers[..i] {
                if other.id == rx.id {
                    return Err(SceneError::DuplicateId(rx.id));
                }
                if (rx.center - other.center).norm() <= rx.radius + other.radius {
                    return Err(SceneError::Overlap(other.id, rx.id));
                }
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.samples - 1
    }

    /// Sample instants `i dt`, `i = 0..samples`.
    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|i| i as f64 * self.dt).collect()
    }

    fn receiver_index(&self, id: usize) -> usize {
        self.receivers.iter().position(|rx| rx.id == id).expect("decision names a scene receiver")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoleculeStatus {
    Free,
    /// Receiver id and the sample index at which the capture is recorded.
    Absorbed { receiver: usize, step: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoleculeState {
    pub position: Vector3,
    pub status: MoleculeStatus,
}

impl MoleculeState {
    pub fn is_free(&self) -> bool {
        self.status == MoleculeStatus::Free
    }
}

/// Newly absorbed counts per receiver per sample. Index 0 (`t = 0`) is always zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepAbsorptionHistogram {
    /// Receiver ids, in scene order.
    pub receiver_ids: Vec<usize>,
    /// `counts[k][i]`: captures by receiver `k` recorded at sample `i`.
    pub counts: Vec<Vec<u64>>,
    /// Number of realizations summed into `counts`.
    pub realizations: u64,
}

impl StepAbsorptionHistogram {
    fn empty(scene: &Scene) -> Self {
        Self {
            receiver_ids: scene.receivers.iter().map(|rx| rx.id).collect(),
            counts: vec![vec![0; scene.samples]; scene.receivers.len()],
            realizations: 1,
        }
    }

    pub fn total_absorbed(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Captures by all receivers up to and including sample `i`.
    pub fn cumulative_at(&self, i: usize) -> u64 {
        self.counts.iter().map(|c| c[..=i].iter().sum::<u64>()).sum()
    }

    fn accumulate(&mut self, other: &StepAbsorptionHistogram) {
        for (mine, theirs) in self.counts.iter_mut().zip(&other.counts) {
            for (m, t) in mine.iter_mut().zip(theirs) {
                *m += t;
            }
        }
        self.realizations += other.realizations;
    }
}

/// Cumulative absorbed fraction per receiver at each sample instant,
/// averaged over realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionCurve {
    pub times: Vec<f64>,
    pub receiver_ids: Vec<usize>,
    /// `fractions[k][i]` for receiver `k` at `times[i]`.
    pub fractions: Vec<Vec<f64>>,
    /// Mean newly absorbed molecules per realization, same layout.
    pub new_absorbed: Vec<Vec<f64>>,
    pub realizations: u64,
}

impl FractionCurve {
    pub fn from_histogram(scene: &Scene, hist: &StepAbsorptionHistogram) -> Self {
        let r = hist.realizations as f64;
        let per_molecule = 1.0 / (scene.molecules as f64 * r);
        let fractions = hist
            .counts
            .iter()
            .map(|c| {
                let mut running = 0u64;
                c.iter()
                    .map(|&n| {
                        running += n;
                        running as f64 * per_molecule
                    })
                    .collect()
            })
            .collect();
        let new_absorbed = hist.counts.iter().map(|c| c.iter().map(|&n| n as f64 / r).collect()).collect();
        Self {
            times: scene.times(),
            receiver_ids: hist.receiver_ids.clone(),
            fractions,
            new_absorbed,
            realizations: hist.realizations,
        }
    }

    /// Fraction absorbed by any receiver.
    pub fn total(&self) -> Vec<f64> {
        (0..self.times.len()).map(|i| self.fractions.iter().map(|f| f[i]).sum()).collect()
    }
}

/// One independent release of `scene.molecules` molecules, advanced step by step.
pub struct Realization<'a> {
    scene: &'a Scene,
    policy: AbsorptionPolicy,
    stream: RngStream,
    ledger: RvLedger,
    molecules: Vec<MoleculeState>,
    histogram: StepAbsorptionHistogram,
    step: usize,
    retry_cap: u32,
}

impl<'a> Realization<'a> {
    pub fn new(scene: &'a Scene, policy: AbsorptionPolicy, seed: u64, index: u64) -> Self {
        let start = MoleculeState { position: scene.transmitter, status: MoleculeStatus::Free };
        Self {
            scene,
            policy,
            stream: RngStream::new(seed, index),
            ledger: RvLedger::default(),
            molecules: vec![start; scene.molecules],
            histogram: StepAbsorptionHistogram::empty(scene),
            step: 0,
            retry_cap: APMC_RETRY_CAP,
        }
    }

    /// Override [`APMC_RETRY_CAP`].
    pub fn with_retry_cap(mut self, cap: u32) -> Self {
        self.retry_cap = cap;
        self
    }

    /// Index of the last completed sample (0 before any step).
    pub fn current_sample(&self) -> usize {
        self.step
    }

    pub fn is_finished(&self) -> bool {
        self.step + 1 >= self.scene.samples
    }

    pub fn molecules(&self) -> &[MoleculeState] {
        &self.molecules
    }

    pub fn ledger(&self) -> RvLedger {
        self.ledger
    }

    pub fn histogram(&self) -> &StepAbsorptionHistogram {
        &self.histogram
    }

    pub fn free_count(&self) -> usize {
        self.molecules.iter().filter(|m| m.is_free()).count()
    }

    /// Advance one time step. No-op once all samples are produced.
    pub fn step(&mut self) -> Result<(), EngineError> {
        if self.is_finished() {
            return Ok(());
        }
        self.step += 1;
        match self.policy.kind {
            PolicyKind::Apmc => self.step_apmc(),
            _ => {
                self.step_diffuse_first();
                Ok(())
            }
        }
    }

    fn record(&mut self, j: usize, receiver: usize) {
        let step = self.step;
        self.molecules[j].status = MoleculeStatus::Absorbed { receiver, step };
        let k = self.scene.receiver_index(receiver);
        self.histogram.counts[k][step] += 1;
    }

    fn step_diffuse_first(&mut self) {
        let scene: &'a Scene = self.scene;
        let Scene { diffusion, dt, .. } = *scene;
        let rxs = &scene.receivers;
        for j in 0..self.molecules.len() {
            if !self.molecules[j].is_free() {
                continue;
            }
            let start = self.molecules[j].position;
            let end = start + sample_displacement(&mut self.stream, diffusion, dt, &mut self.ledger);
            self.molecules[j].position = end;
            let decision = match self.policy.kind {
                PolicyKind::Smc => decide_smc(end, rxs),
                PolicyKind::LineCrossing => decide_line(start, end, rxs),
                PolicyKind::Rmc => {
                    decide_rmc(start, end, rxs, j, diffusion, dt, &self.policy, &mut self.stream, &mut self.ledger)
                }
                PolicyKind::Apmc => unreachable!("apmc has its own step"),
            };
            if let Some(id) = decision.absorbed_by {
                self.record(j, id);
            }
        }
    }

    fn step_apmc(&mut self) -> Result<(), EngineError> {
        let scene: &'a Scene = self.scene;
        let Scene { diffusion, dt, .. } = *scene;
        let rxs = &scene.receivers;
        for j in 0..self.molecules.len() {
            if !self.molecules[j].is_free() {
                continue;
            }
            let pos = self.molecules[j].position;
            let decision =
                decide_apmc_preliminary(pos, rxs, j, diffusion, dt, &self.policy, &mut self.stream, &mut self.ledger);
            if let Some(id) = decision.absorbed_by {
                self.record(j, id);
            }
        }
        for (j, molecule) in self.molecules.iter_mut().enumerate() {
            if !molecule.is_free() {
                continue;
            }
            let start = molecule.position;
            let mut attempts = 0;
            loop {
                let end = start + sample_displacement(&mut self.stream, diffusion, dt, &mut self.ledger);
                if !rxs.iter().any(|rx| is_inside(end, rx)) {
                    molecule.position = end;
                    break;
                }
                attempts += 1;
                if attempts > self.retry_cap {
                    return Err(EngineError::RetryCapExceeded { molecule: j, step: self.step, attempts });
                }
            }
        }
        Ok(())
    }

    pub fn run_to_end(&mut self) -> Result<(), EngineError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_parts(self) -> (StepAbsorptionHistogram, RvLedger) {
        (self.histogram, self.ledger)
    }
}

/// Simulate all steps of one realization.
pub fn run_realization(
    scene: &Scene,
    policy: &AbsorptionPolicy,
    seed: u64,
    stream_index: u64,
) -> Result<(StepAbsorptionHistogram, RvLedger), EngineError> {
    let mut r = Realization::new(scene, *policy, seed, stream_index);
    r.run_to_end()?;
    Ok(r.into_parts())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub curve: FractionCurve,
    pub ledger: RvLedger,
    pub histogram: StepAbsorptionHistogram,
}

/// Run `realizations` independent realizations (stream indices `0..realizations`)
/// and reduce them. `workers = 0` uses rayon's default pool size. The result
/// does not depend on `workers`.
pub fn run_batch(
    scene: &Scene,
    policy: &AbsorptionPolicy,
    seed: u64,
    realizations: u64,
    workers: usize,
) -> Result<BatchResult, EngineError> {
    if realizations == 0 {
        return Err(EngineError::NoRealizations);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
    let parts = pool.install(|| {
        (0..realizations)
            .into_par_iter()
            .map(|i| {
                run_realization(scene, policy, seed, i)
                    .map_err(|e| EngineError::Realization { realization: i, source: Box::new(e) })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(reduce(scene, parts))
}

/// Same result as [`run_batch`], computed on the calling thread. For targets
/// without threads.
pub fn run_batch_serial(
    scene: &Scene,
    policy: &AbsorptionPolicy,
    seed: u64,
    realizations: u64,
) -> Result<BatchResult, EngineError> {
    if realizations == 0 {
        return Err(EngineError::NoRealizations);
    }
    let parts = (0..realizations)
        .map(|i| {
            run_realization(scene, policy, seed, i)
                .map_err(|e| EngineError::Realization { realization: i, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(reduce(scene, parts))
}

fn reduce(scene: &Scene, parts: Vec<(StepAbsorptionHistogram, RvLedger)>) -> BatchResult {
    let mut parts = parts.into_iter();
    let (mut histogram, mut ledger) = parts.next().expect("at least one realization");
    for (h, l) in parts {
        histogram.accumulate(&h);
        ledger += l;
    }
    let curve = FractionCurve::from_histogram(scene, &histogram);
    BatchResult { curve, ledger, histogram }
}
