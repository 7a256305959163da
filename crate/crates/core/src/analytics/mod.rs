//! Closed-form references for diffusive capture by absorbing spheres.

mod bispherical;
mod erfc;

pub use bispherical::{bispherical_capture, legendre_p, two_rx_asymptote, AsymptoteResult};
pub use erfc::{erf, erfc, erfcx};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("receiver radius {radius} m exceeds release distance {distance} m")]
    InsideReceiver { radius: f64, distance: f64 },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, AnalyticsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(AnalyticsError::InvalidParameter { name, value })
    }
}

/// Single-receiver channel: point release at distance `distance` from the
/// center of a sphere of radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// m^2/s
    pub diffusion: f64,
    /// transmitter to receiver-center distance, m
    pub distance: f64,
    /// receiver radius, m
    pub radius: f64,
    /// s
    pub dt: f64,
    pub molecules: usize,
}

impl ChannelParams {
    pub fn new(
        diffusion: f64,
        distance: f64,
        radius: f64,
        dt: f64,
        molecules: usize,
    ) -> Result<Self, AnalyticsError> {
        positive("diffusion", diffusion)?;
        positive("distance", distance)?;
        positive("radius", radius)?;
        positive("dt", dt)?;
        if radius > distance {
            return Err(AnalyticsError::InsideReceiver { radius, distance });
        }
        if molecules == 0 {
            return Err(AnalyticsError::InvalidParameter { name: "molecules", value: 0.0 });
        }
        Ok(Self { diffusion, distance, radius, dt, molecules })
    }
}

/// Fraction of molecules released at distance `d` that an absorbing sphere
/// of radius `a` has captured by time `t`: `(a/d) erfc((d - a) / sqrt(4 D t))`.
pub fn hitting_fraction(a: f64, d: f64, diffusion: f64, t: f64) -> Result<f64, AnalyticsError> {
    positive("radius", a)?;
    positive("diffusion", diffusion)?;
    if !(t >= 0.0) {
        return Err(AnalyticsError::InvalidParameter { name: "time", value: t });
    }
    if a > d {
        return Err(AnalyticsError::InsideReceiver { radius: a, distance: d });
    }
    Ok(capture_unchecked(a, d, diffusion, t))
}

#[inline]
pub(crate) fn capture_unchecked(a: f64, d: f64, diffusion: f64, t: f64) -> f64 {
    let gap = d - a;
    if gap <= 0.0 {
        return 1.0;
    }
    if t == 0.0 {
        return 0.0;
    }
    a / d * erfc(gap / (4.0 * diffusion * t).sqrt())
}

/// Crossing probability of a Brownian bridge over a flat absorbing plane,
/// `exp(-l_i l_f / (D dt))`, for start/end distances `l_i`, `l_f` from it.
#[inline]
pub fn planar_intra_step_prob(l_i: f64, l_f: f64, diffusion: f64, dt: f64) -> f64 {
    (-(l_i * l_f) / (diffusion * dt)).exp()
}

/// Probability that a free molecule at center distance `d_j` is captured
/// within one step `dt` by an isolated sphere of radius `a`.
pub fn apriori_prob(a: f64, d_j: f64, diffusion: f64, dt: f64) -> Result<f64, AnalyticsError> {
    positive("dt", dt)?;
    hitting_fraction(a, d_j, diffusion, dt)
}
