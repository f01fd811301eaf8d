//! Error-probability bounds for maximum-likelihood detection over correlated
//! Rayleigh block fading.
//!
//! Three estimates of the block error probability are provided:
//!
//! * the classical union bound,
//! * a tighter bound that treats every deep fade (`||h||² < γ`) as an error
//!   and minimizes over the threshold `γ`,
//! * seeded Monte Carlo simulation of the exact ML detector.

pub mod bounds;
pub mod channel;
pub mod constellation;
mod dd;
pub mod error;
pub mod exec;
pub mod quadrature;
pub mod simulate;
pub mod special;
pub mod sweep;

pub use bounds::{BoundEvaluator, BoundPoint, LinkParams, NewBound};
pub use channel::{ChannelSummary, CorrelationMatrix, GainModel, RayleighChannel};
pub use constellation::{Constellation, DistanceSpectrum, SpectrumEntry};
pub use error::{Error, Result};
pub use exec::Exec;
pub use simulate::McEstimate;
pub use sweep::{run_sweep, ChannelSpec, Compute, Scheme, SweepConfig, SweepOutcome, SweepRow};

/// Library version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
