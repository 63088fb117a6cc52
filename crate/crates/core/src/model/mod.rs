//! Model parameters, admissibility checks and energy functionals.

mod functional;
mod kernel;
mod params;
mod validation;

pub use functional::{
    coulomb_energy, coupled_multipliers, energy_coupled, energy_general, energy_scalar,
    gradient_coupled, gradient_general, gradient_scalar, lagrange_multiplier, residual,
    CoupledEnergyParts, CoupledEvaluation, CoupledFunctional, EnergyParts, Evaluation, Functional,
};
pub use kernel::{kernel_convolve, KernelSpec, TabulatedKernel};
pub use params::{CoupledModel, GeneralModel, HartreeTerm, PowerTerm, ScalarModel};
pub use validation::{
    validate_coupled, validate_general, validate_kernel, validate_scalar, ValidationReport,
    Violation,
};
