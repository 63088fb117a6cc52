//! Spectral ground states and dynamics for fractional Schrödinger–Choquard
//! equations.

pub mod error;
pub mod diagnostics;
pub mod dynamics;
pub mod grid_spectral;
pub mod io;
pub mod ground_state;
pub mod model;
pub mod rng;
pub mod scalar;

#[cfg(test)]
mod test_fields;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Field64 = grid_spectral::Field<f64>;
pub type FieldPair64 = grid_spectral::FieldPair<f64>;
pub type GridSpec64 = grid_spectral::GridSpec<f64>;
pub type Field32 = grid_spectral::Field<f32>;
pub type GridSpec32 = grid_spectral::GridSpec<f32>;
