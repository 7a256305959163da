//! Seeded random streams and random-variate bookkeeping.
//!
//! Every realization owns one [`RngStream`], keyed by `(seed, stream index)`.
//! Draws made through [`sample_uniform`] and [`sample_displacement`] are
//! charged to an [`RvLedger`], which is the complexity metric reported by
//! the simulator.

use std::f64::consts::PI;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::Vector3;

/// Uniform-equivalent cost of one Gaussian variate (polar Box-Muller rejection rate).
pub const GAUSSIAN_UNIFORM_EQUIVALENT: f64 = 4.0 / PI;

/// Source of raw variates. Implemented by [`RngStream`]; tests substitute
/// scripted sources to force particular draws.
pub trait Variates {
    /// Uniform on `[0, 1)`.
    fn uniform(&mut self) -> f64;
    fn standard_normal(&mut self) -> f64;
}

/// Deterministic generator for one realization.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

impl Variates for RngStream {
    #[inline]
    fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// Counts of uniform and Gaussian variates consumed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RvLedger {
    pub n_uniform: u64,
    pub n_gaussian: u64,
}

impl RvLedger {
    pub fn new(n_uniform: u64, n_gaussian: u64) -> Self {
        Self { n_uniform, n_gaussian }
    }

    /// Uniform-equivalent total, `n_uniform + (4/π) n_gaussian`.
    pub fn total(&self) -> f64 {
        ledger_total(self)
    }

    pub fn merge(self, other: RvLedger) -> RvLedger {
        self + other
    }
}

impl Add for RvLedger {
    type Output = RvLedger;
    fn add(self, rhs: RvLedger) -> RvLedger {
        RvLedger {
            n_uniform: self.n_uniform + rhs.n_uniform,
            n_gaussian: self.n_gaussian + rhs.n_gaussian,
        }
    }
}

impl AddAssign for RvLedger {
    fn add_assign(&mut self, rhs: RvLedger) {
        *self = *self + rhs;
    }
}

impl Sum for RvLedger {
    fn sum<I: Iterator<Item = RvLedger>>(iter: I) -> RvLedger {
        iter.fold(RvLedger::default(), Add::add)
    }
}

pub fn ledger_total(ledger: &RvLedger) -> f64 {
    ledger.n_uniform as f64 + GAUSSIAN_UNIFORM_EQUIVALENT * ledger.n_gaussian as f64
}

/// One uniform on `[0, 1)`, charged to the ledger.
#[inline]
pub fn sample_uniform<V: Variates + ?Sized>(stream: &mut V, ledger: &mut RvLedger) -> f64 {
    ledger.n_uniform += 1;
    stream.uniform()
}

/// Brownian displacement over `dt`: three independent normals with variance
/// `2 D dt`. Charges three Gaussians.
#[inline]
pub fn sample_displacement<V: Variates + ?Sized>(
    stream: &mut V,
    diffusion: f64,
    dt: f64,
    ledger: &mut RvLedger,
) -> Vector3 {
    let sigma = (2.0 * diffusion * dt).sqrt();
    ledger.n_gaussian += 3;
    let x = stream.standard_normal();
    let y = stream.standard_normal();
    let z = stream.standard_normal();
    Vector3::new(x, y, z) * sigma
}
