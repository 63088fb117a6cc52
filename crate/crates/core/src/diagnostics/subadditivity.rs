use serde::Serialize;

use crate::error::{param, Result};
use crate::grid_spectral::GridSpec;
use crate::ground_state::{solve_scalar_multistart, FlowConfig};
use crate::model::{validate_scalar, ScalarModel};
use crate::scalar::Real;

/// Splits closer than this fraction of `σ` to either end are rejected.
pub const MIN_SPLIT_FRACTION: f64 = 0.05;

/// Energies `J(σ')`, `J(σ−σ')`, `J(σ)` and margins
/// `J(σ') + J(σ−σ') − J(σ)`.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaScan<T> {
    pub sigma_total: T,
    pub splits: Vec<T>,
    pub energy_split: Vec<T>,
    pub energy_rest: Vec<T>,
    pub energy_total: T,
    /// `None` where a sub-solve did not converge.
    pub margins: Vec<Option<T>>,
}

impl<T: Real> SigmaScan<T> {
    /// Every split usable and strictly positive.
    pub fn strictly_subadditive(&self) -> bool {
        self.margins.iter().all(|m| matches!(m, Some(v) if *v > T::zero()))
    }
}

/// Minimum energy at each mass, solved once per distinct mass with
/// `cfg.multistart` starts.
struct EnergyCache<'a, T: Real> {
    m: &'a ScalarModel<T>,
    grid: GridSpec<T>,
    cfg: &'a FlowConfig,
    known: Vec<(T, T, bool)>,
}

impl<T: Real> EnergyCache<'_, T> {
    fn get(&mut self, sigma: T) -> Result<(T, bool)> {
        if let Some(&(_, e, ok)) = self.known.iter().find(|(s, _, _)| *s == sigma) {
            return Ok((e, ok));
        }
        let ms = solve_scalar_multistart(&self.m.with_sigma(sigma), self.grid, self.cfg)?;
        let out = (ms.best.energy, ms.best.converged);
        self.known.push((sigma, out.0, out.1));
        Ok(out)
    }
}

/// Solves at `σ`, `σ'` and `σ − σ'` for every split `σ'` and reports the
/// subadditivity margins.
pub fn subadditivity_scan<T: Real>(
    m: &ScalarModel<T>,
    splits: &[T],
    grid: GridSpec<T>,
    cfg: &FlowConfig,
) -> Result<SigmaScan<T>> {
    let report = validate_scalar(m);
    if !report.ok() {
        return Err(param(report.to_string()));
    }
    let sigma = m.sigma;
    let guard = T::lit(MIN_SPLIT_FRACTION) * sigma;
    for &s in splits {
        if !(s >= guard && sigma - s >= guard) {
            return Err(param(format!(
                "split {s} must lie in [{guard}, {}] (at least {MIN_SPLIT_FRACTION}·σ from either end)",
                sigma - guard
            )));
        }
    }
    let mut cache = EnergyCache { m, grid, cfg, known: Vec::new() };
    let (energy_total, total_ok) = cache.get(sigma)?;
    let mut scan = SigmaScan {
        sigma_total: sigma,
        splits: splits.to_vec(),
        energy_split: Vec::new(),
        energy_rest: Vec::new(),
        energy_total,
        margins: Vec::new(),
    };
    for &s in splits {
        let (a, ok_a) = cache.get(s)?;
        let (b, ok_b) = cache.get(sigma - s)?;
        scan.energy_split.push(a);
        scan.energy_rest.push(b);
        scan.margins.push((total_ok && ok_a && ok_b).then(|| a + b - energy_total));
    }
    Ok(scan)
}
