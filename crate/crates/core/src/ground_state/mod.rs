//! Constrained energy minimization and multiplier recovery.

mod config;
mod coupled;
mod init;
mod scalar;
mod solver;
mod state;

pub use config::FlowConfig;
pub use coupled::solve_coupled;
pub use init::{boundary_mass, centering_shift, gaussian_init, multistart_init};
pub use scalar::{solve_general, solve_scalar, solve_scalar_multistart, MultiStart};
pub use state::{CoupledGroundState, GroundState, IterationRecord, SolveStatus, TheoremFlags};

pub use crate::model::{coupled_multipliers, lagrange_multiplier, residual};
