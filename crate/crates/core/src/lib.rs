//! Simulation and algorithms toolkit for large sensor networks.
//!
//! The crate is organized around four problem areas plus shared machinery:
//!
//! - [`rgg`]: random graph models (geometric range, k-nearest-neighbor,
//!   Erdos-Renyi), connectivity testing and Monte Carlo threshold sweeps.
//! - [`capacity`]: protocol/physical interference models, the cell-based
//!   multihop relay scheme and transport/throughput capacity accounting.
//! - [`clocks`]: affine clock simulation, skew/delay/offset estimators,
//!   uncertainty sets, network least squares and spatial smoothing.
//! - [`compute`]: zero-error in-network function computation, rate-region
//!   bounds, symmetric-function classification and Boolean complexity.
//! - [`numerics`]: dense linear algebra, max-flow, a small simplex LP and
//!   the deterministic PRNG used everywhere.
//! - [`acceptance`]: the experiment suite behind `sensornet report`.

pub mod acceptance;
pub mod capacity;
pub mod cli;
pub mod clocks;
pub mod compute;
mod error;
pub mod numerics;
pub mod rgg;

pub use error::{Error, Result};
