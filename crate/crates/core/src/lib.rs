//! Particle-based simulation of diffusive molecular channels with absorbing
//! spherical receivers, plus closed-form references and accuracy metrics.

pub mod absorption;
pub mod analytics;
pub mod engine;
pub mod geometry;
pub mod metrics;
pub mod stochastic;

pub use absorption::{AbsorptionPolicy, PolicyError, PolicyKind};
pub use analytics::{hitting_fraction, two_rx_asymptote, AnalyticsError, ChannelParams};
pub use engine::{run_batch, run_batch_serial, run_realization, BatchResult, EngineError, FractionCurve, Scene, SceneError};
pub use geometry::{SphereReceiver, Vector3};
pub use metrics::{kappa, predict_r2, r_squared, rmse, AccuracyReport, FitOrder, KappaInputs, MetricsError};
pub use stochastic::{RngStream, RvLedger};
