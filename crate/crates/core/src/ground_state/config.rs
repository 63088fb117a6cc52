use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid_spectral::ConvolutionMode;

/// Settings of the constrained minimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    /// Step scale of the preconditioner `((−Δ)^α + 1/τ)^{-1}`.
    pub tau: f64,
    pub max_iters: usize,
    /// Stop once `‖G + ωu‖/‖u‖` is below this.
    pub grad_tol: f64,
    /// Stop after [`FlowConfig::stall_window`] consecutive steps with
    /// `|ΔJ| < energy_tol·|J|`.
    pub energy_tol: f64,
    pub stall_window: usize,
    /// Step reduction factor of the backtracking search.
    pub backtrack_factor: f64,
    pub max_halvings: usize,
    /// Replace `u` by its decreasing rearrangement every this many steps
    /// when that lowers the energy. `0` disables it.
    pub symmetrize_every: usize,
    pub seed: u64,
    /// Number of starts used by multi-start drivers.
    pub multistart: usize,
    pub convolution: ConvolutionMode,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            max_iters: 3000,
            grad_tol: 1e-9,
            energy_tol: 1e-15,
            stall_window: 50,
            backtrack_factor: 0.5,
            max_halvings: 30,
            symmetrize_every: 0,
            seed: 0,
            multistart: 3,
            convolution: ConvolutionMode::FreeSpace,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(param(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.grad_tol > 0.0 && self.energy_tol > 0.0) {
            return Err(param("tolerances must be positive"));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(param(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if self.max_iters == 0 || self.stall_window == 0 || self.multistart == 0 {
            return Err(param("max_iters, stall_window and multistart must be at least 1"));
        }
        Ok(())
    }
}
