//! Microwave power transfer and wirelessly powered communication toolkit.
//!
//! - [`linkphys`]: free-space beam efficiency and the DC-to-DC efficiency chain
//! - [`devices`]: device catalog, power-transfer ranges, SWIPT budgets, ambient scavenging
//! - [`safety`]: exposure densities, unsafe beam-interception distances, duty cycles
//! - [`beamsim`]: retrodirective phased-array simulation
//! - [`netcov`]: stochastic-geometry coverage simulation

pub mod beamsim;
pub mod devices;
mod error;
pub mod linkphys;
pub mod netcov;
pub mod safety;

pub use error::{Error, Result};
