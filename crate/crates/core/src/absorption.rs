//! Per-molecule absorption decisions.
//!
//! Four rules are provided:
//!
//! * [`PolicyKind::Smc`]: absorbed only if the molecule ends a step inside a receiver.
//! * [`PolicyKind::LineCrossing`]: absorbed if the straight segment between the
//!   start and end of a step touches a receiver.
//! * [`PolicyKind::Rmc`]: endpoint containment, plus a probabilistic intra-step
//!   crossing test using the flat-plane bridge probability.
//! * [`PolicyKind::Apmc`]: absorbed *before* diffusing, with the isolated-sphere
//!   one-step capture probability.
//!
//! With more than one receiver, RMC and APMC test receivers one at a time in
//! ascending distance order with an independent uniform each; the first success
//! wins. A receiver whose computed probability is below the likelihood threshold
//! `xi` is skipped without a draw.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::analytics::{capture_unchecked, planar_intra_step_prob};
use crate::geometry::{is_inside, segment_entry_parameter, signed_surface_distance, SphereReceiver, Vector3};
use crate::stochastic::{sample_uniform, RvLedger, Variates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Smc,
    Rmc,
    LineCrossing,
    Apmc,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::Smc, PolicyKind::Rmc, PolicyKind::LineCrossing, PolicyKind::Apmc];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Smc => "smc",
            PolicyKind::Rmc => "rmc",
            PolicyKind::LineCrossing => "line",
            PolicyKind::Apmc => "apmc",
        }
    }

    /// Whether the rule draws uniforms, and therefore honors `xi`.
    pub fn is_probabilistic(self) -> bool {
        matches!(self, PolicyKind::Rmc | PolicyKind::Apmc)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("unknown algorithm '{0}' (expected smc, rmc, line or apmc)")]
    UnknownKind(String),
    #[error("likelihood threshold must lie in [0, 1), got {0}")]
    InvalidThreshold(f64),
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "smc" => Ok(PolicyKind::Smc),
            "rmc" => Ok(PolicyKind::Rmc),
            "line" | "line_crossing" | "line-crossing" | "accord" => Ok(PolicyKind::LineCrossing),
            "apmc" => Ok(PolicyKind::Apmc),
            other => Err(PolicyError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionPolicy {
    pub kind: PolicyKind,
    /// Likelihood threshold. Ignored by SMC and line crossing.
    pub xi: f64,
}

impl AbsorptionPolicy {
    pub fn new(kind: PolicyKind, xi: f64) -> Result<Self, PolicyError> {
        if !(0.0..1.0).contains(&xi) {
            return Err(PolicyError::InvalidThreshold(xi));
        }
        Ok(Self { kind, xi })
    }

    /// Policy with `xi = 0`.
    pub fn plain(kind: PolicyKind) -> Self {
        Self { kind, xi: 0.0 }
    }
}

/// Outcome of one absorption test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Decision {
    /// Id of the absorbing receiver.
    pub absorbed_by: Option<usize>,
    pub uniforms_drawn: u32,
}

impl Decision {
    pub fn absorbed(&self) -> bool {
        self.absorbed_by.is_some()
    }
}

fn first_containing(p: Vector3, rxs: &[SphereReceiver]) -> Option<&SphereReceiver> {
    rxs.iter().find(|rx| is_inside(p, rx))
}

/// Draw-and-compare with threshold. `pr >= u` with `u` on `[0, 1)`, except that
/// a zero probability never absorbs.
#[inline]
fn bernoulli<V: Variates + ?Sized>(pr: f64, xi: f64, stream: &mut V, ledger: &mut RvLedger, drawn: &mut u32) -> bool {
    if pr < xi {
        return false;
    }
    *drawn += 1;
    let u = sample_uniform(stream, ledger);
    pr > 0.0 && pr >= u
}

/// Receivers sorted by a key, ascending. Exact ties are ordered cyclically
/// starting from slice index `tie_break % n`, so a caller that varies
/// `tie_break` (the engine passes the molecule index) does not favor the
/// first-listed receiver in symmetric scenes.
fn ordered_by<F: Fn(&SphereReceiver) -> f64>(
    rxs: &[SphereReceiver],
    tie_break: usize,
    key: F,
) -> SmallVec<[(f64, usize); 4]> {
    let n = rxs.len();
    let rot = tie_break % n;
    let mut order: SmallVec<[(f64, usize); 4]> = rxs.iter().enumerate().map(|(i, rx)| (key(rx), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(((a.1 + n - rot) % n).cmp(&((b.1 + n - rot) % n))));
    order
}

pub fn decide_smc(end: Vector3, rxs: &[SphereReceiver]) -> Decision {
    Decision { absorbed_by: first_containing(end, rxs).map(|rx| rx.id), uniforms_drawn: 0 }
}

/// Absorbed by the receiver whose closed ball the segment enters first.
pub fn decide_line(start: Vector3, end: Vector3, rxs: &[SphereReceiver]) -> Decision {
    let first = rxs
        .iter()
        .filter_map(|rx| segment_entry_parameter(start, end, rx).map(|t| (t, rx.id)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    Decision { absorbed_by: first.map(|(_, id)| id), uniforms_drawn: 0 }
}

/// Endpoint containment, then a planar-bridge crossing test per receiver.
/// `start` must be outside every receiver.
pub fn decide_rmc<V: Variates + ?Sized>(
    start: Vector3,
    end: Vector3,
    rxs: &[SphereReceiver],
    tie_break: usize,
    diffusion: f64,
    dt: f64,
    policy: &AbsorptionPolicy,
    stream: &mut V,
    ledger: &mut RvLedger,
) -> Decision {
    if let Some(rx) = first_containing(end, rxs) {
        return Decision { absorbed_by: Some(rx.id), uniforms_drawn: 0 };
    }
    let mut drawn = 0;
    let test = |rx: &SphereReceiver, stream: &mut V, ledger: &mut RvLedger, drawn: &mut u32| {
        let l_i = signed_surface_distance(start, rx);
        let l_f = signed_surface_distance(end, rx);
        let pr = planar_intra_step_prob(l_i, l_f, diffusion, dt);
        bernoulli(pr, policy.xi, stream, ledger, drawn)
    };
    let absorbed_by = if rxs.len() == 1 {
        test(&rxs[0], stream, ledger, &mut drawn).then_some(rxs[0].id)
    } else {
        ordered_by(rxs, tie_break, |rx| signed_surface_distance(end, rx))
            .into_iter()
            .find(|&(_, i)| test(&rxs[i], stream, ledger, &mut drawn))
            .map(|(_, i)| rxs[i].id)
    };
    Decision { absorbed_by, uniforms_drawn: drawn }
}

/// Pre-diffusion capture test. `pos` must be outside every receiver.
pub fn decide_apmc_preliminary<V: Variates + ?Sized>(
    pos: Vector3,
    rxs: &[SphereReceiver],
    tie_break: usize,
    diffusion: f64,
    dt: f64,
    policy: &AbsorptionPolicy,
    stream: &mut V,
    ledger: &mut RvLedger,
) -> Decision {
    let mut drawn = 0;
    let test = |rx: &SphereReceiver, d_j: f64, stream: &mut V, ledger: &mut RvLedger, drawn: &mut u32| {
        let pr = capture_unchecked(rx.radius, d_j, diffusion, dt);
        bernoulli(pr, policy.xi, stream, ledger, drawn)
    };
    let absorbed_by = if rxs.len() == 1 {
        let rx = &rxs[0];
        test(rx, rx.center_distance(pos), stream, ledger, &mut drawn).then_some(rx.id)
    } else {
        ordered_by(rxs, tie_break, |rx| rx.center_distance(pos))
            .into_iter()
            .find(|&(d_j, i)| test(&rxs[i], d_j, stream, ledger, &mut drawn))
            .map(|(_, i)| rxs[i].id)
    };
    Decision { absorbed_by, uniforms_drawn: drawn }
}
