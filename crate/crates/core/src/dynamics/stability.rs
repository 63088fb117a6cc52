use num_complex::Complex;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::config::PropagatorConfig;
use super::distance::DistanceMeter;
use super::propagator::{run_observed, Conservation, CoupledPropagator, Evolution, ScalarPropagator};
use crate::error::{param, Error, Result};
use crate::grid_spectral::{Field, FieldPair, GridSpec, SpectralPlan};
use crate::ground_state::{CoupledGroundState, GroundState};
use crate::model::{CoupledModel, ScalarModel};
use crate::rng::{self, streams};
use crate::scalar::Real;

/// Modulated distance to a reference profile along a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport<T> {
    pub times: Vec<T>,
    pub modulated_distance: Vec<T>,
    pub initial_distance: T,
    pub max_distance: T,
    pub mass_drift: T,
    pub energy_drift: T,
    /// Time of the first non-finite value when the run blew up.
    pub blowup_time: Option<f64>,
}

impl<T: Real> StabilityReport<T> {
    /// `max_distance / initial_distance`.
    pub fn growth(&self) -> T {
        self.max_distance / self.initial_distance
    }
}

/// Random field whose spectrum is supported on `|m_d| < M/8` along every
/// axis, the lowest quarter of the resolved band.
pub fn band_limited_noise<T: Real>(grid: GridSpec<T>, seed: u64, stream: u64) -> Field<T> {
    let mut r = rng::stream(seed, stream);
    let plan = SpectralPlan::new(grid);
    let cut = (grid.points() / 8) as i64;
    let spec = (0..grid.len())
        .map(|k| {
            let idx = grid.unravel(k);
            // draw for every mode so the sequence does not depend on the cut
            let re: f64 = StandardNormal.sample(&mut r);
            let im: f64 = StandardNormal.sample(&mut r);
            let inside = (0..grid.dim()).all(|d| grid.signed_index(idx[d]).abs() < cut);
            if inside {
                Complex::new(T::lit(re), T::lit(im))
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
        .collect();
    plan.inverse(spec)
}

/// `u + δw` with `‖δw‖_{H^α} = size·‖u‖_{H^α}`, rescaled to the mass of `u`.
pub fn perturb<T: Real>(u: &Field<T>, w: &Field<T>, size: T, alpha: T) -> Result<Field<T>> {
    let plan = SpectralPlan::new(*u.grid());
    let nu = plan.h_alpha_norm_sq(u, alpha)?.sqrt();
    let nw = plan.h_alpha_norm_sq(w, alpha)?.sqrt();
    let mut v = u.clone();
    if size > T::zero() {
        if !(nw > T::zero()) {
            return Err(param("perturbation direction vanishes"));
        }
        v.add_scaled(size * nu / nw, w);
        v.normalize_to(u.mass())?;
    }
    Ok(v)
}

fn check_size<T: Real>(size: T) -> Result<()> {
    if size.is_finite() && size >= T::zero() {
        Ok(())
    } else {
        Err(param(format!("perturbation size must be non-negative, got {size}")))
    }
}

fn track<T: Real, E: Evolution<T>>(
    ev: &mut E,
    cfg: &PropagatorConfig,
    mut distance: impl FnMut(&E) -> Result<T>,
) -> Result<StabilityReport<T>> {
    let mut cons = Conservation::default();
    let (mut times, mut dist) = (Vec::new(), Vec::new());
    let outcome = run_observed(ev, cfg, &mut cons, |e| {
        times.push(e.time());
        dist.push(distance(e)?);
        Ok(())
    });
    let blowup_time = match outcome {
        Ok(()) => None,
        Err(Error::BlowUp { time }) => Some(time),
        Err(e) => return Err(e),
    };
    let initial_distance = dist[0];
    let max_distance = dist.iter().fold(T::zero(), |a, &b| a.max(b));
    Ok(StabilityReport {
        times,
        modulated_distance: dist,
        initial_distance,
        max_distance,
        mass_drift: cons.mass_drift,
        energy_drift: cons.energy_drift,
        blowup_time,
    })
}

/// Perturbs a converged ground state by band-limited noise of relative
/// H^α size `size`, evolves it and records the modulated distance to the
/// unperturbed profile at every output step.
pub fn stability_experiment<T: Real>(
    gs: &GroundState<T>,
    m: &ScalarModel<T>,
    size: T,
    cfg: &PropagatorConfig,
    seed: u64,
) -> Result<StabilityReport<T>> {
    if !gs.converged {
        return Err(param("stability experiments need a converged ground state"));
    }
    check_size(size)?;
    cfg.validate()?;
    let w = band_limited_noise(*gs.u.grid(), seed, streams::PERTURBATION);
    let u0 = perturb(&gs.u, &w, size, m.alpha)?;
    let meter = DistanceMeter::new(&[&gs.u], m.alpha)?;
    let mut ev = ScalarPropagator::new(&u0, m, cfg)?;
    track(&mut ev, cfg, |e| Ok(meter.measure(&[e.field()])?.distance))
}

/// Coupled version: each component gets its own noise and the distance uses
/// one translation with independent phases.
pub fn stability_experiment_coupled<T: Real>(
    gs: &CoupledGroundState<T>,
    m: &CoupledModel<T>,
    size: T,
    cfg: &PropagatorConfig,
    seed: u64,
) -> Result<StabilityReport<T>> {
    if !gs.converged {
        return Err(param("stability experiments need a converged ground state"));
    }
    check_size(size)?;
    cfg.validate()?;
    let grid = *gs.u1.grid();
    let w1 = band_limited_noise(grid, seed, streams::PERTURBATION);
    let w2 = band_limited_noise(grid, seed, streams::PERTURBATION + 1);
    let u0 = FieldPair::new(perturb(&gs.u1, &w1, size, m.alpha)?, perturb(&gs.u2, &w2, size, m.alpha)?)?;
    let meter = DistanceMeter::new(&[&gs.u1, &gs.u2], m.alpha)?;
    let mut ev = CoupledPropagator::new(&u0, m, cfg)?;
    track(&mut ev, cfg, |e| {
        let p = e.pair();
        Ok(meter.measure(&[&p.first, &p.second])?.distance)
    })
}
