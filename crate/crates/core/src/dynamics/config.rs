use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::grid_spectral::ConvolutionMode;

/// Time stepping settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Snapshot every this many steps.
    pub output_stride: usize,
    /// Energy is evaluated every this many steps. Mass is checked every step.
    pub conservation_check_stride: usize,
    pub convolution: ConvolutionMode,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 1.0,
            output_stride: 100,
            conservation_check_stride: 100,
            convolution: ConvolutionMode::FreeSpace,
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(param(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > self.dt) {
            return Err(param(format!(
                "t_final must exceed dt, got t_final = {} and dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.output_stride == 0 || self.conservation_check_stride == 0 {
            return Err(param("strides must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps and the step actually taken, `t_final / steps`.
    pub fn steps(&self) -> (usize, f64) {
        let n = (self.t_final / self.dt).round().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}
