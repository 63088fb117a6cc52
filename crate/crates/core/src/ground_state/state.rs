use serde::Serialize;

use crate::grid_spectral::Field;
use crate::model::{CoupledEnergyParts, EnergyParts};

/// Why the minimization stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Energy stopped changing before the residual target was met.
    Stalled,
    MaxIterations,
    /// Repeated line-search failures.
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub energy: T,
    /// One multiplier per component.
    pub omega: Vec<T>,
    /// One relative residual per component.
    pub residual: Vec<T>,
}

/// Sign and positivity checks a minimizer is expected to pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremFlags {
    pub energy_negative: bool,
    /// Every multiplier positive.
    pub multiplier_positive: bool,
    /// Every component positive after phase alignment, up to roundoff.
    pub profile_positive: bool,
}

/// Relative level below which a negative real part counts as roundoff.
const ROUNDOFF: f64 = 1e-12;

/// Phase-aligned `u` is positive: no zero modulus and no real part below
/// `−1e-12·max|u|`.
pub(crate) fn is_positive_profile<T: crate::Real>(u: &Field<T>) -> bool {
    let floor = -T::lit(ROUNDOFF) * u.max_abs();
    u.values().iter().all(|z| z.norm() > T::zero() && z.re >= floor)
}

impl TheoremFlags {
    pub fn all(&self) -> bool {
        self.energy_negative && self.multiplier_positive && self.profile_positive
    }
}

/// Result of a scalar minimization, gauge fixed: the largest-modulus cell
/// is positive real and the density centroid sits on the box centre,
/// unless recentring keeps undoing convergence.
#[derive(Clone, Debug)]
pub struct GroundState<T> {
    pub u: Field<T>,
    pub omega: T,
    pub energy: T,
    pub energy_parts: EnergyParts<T>,
    /// `‖G(u) + ωu‖ / ‖u‖`.
    pub residual: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub status: SolveStatus,
    pub flags: TheoremFlags,
    pub min_modulus: T,
    /// Mass in the outer boundary layer of the box.
    pub boundary_mass: T,
    pub warnings: Vec<String>,
    pub history: Vec<IterationRecord<T>>,
}

impl<T> GroundState<T> {
    /// Converged and every theorem flag holds.
    pub fn passed(&self) -> bool {
        self.converged && self.flags.all()
    }
}

#[derive(Clone, Debug)]
pub struct CoupledGroundState<T> {
    pub u1: Field<T>,
    pub u2: Field<T>,
    pub omega1: T,
    pub omega2: T,
    pub energy: T,
    pub energy_parts: CoupledEnergyParts<T>,
    pub residuals: (T, T),
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub status: SolveStatus,
    pub flags: TheoremFlags,
    pub min_modulus: (T, T),
    pub boundary_mass: T,
    pub warnings: Vec<String>,
    pub history: Vec<IterationRecord<T>>,
}

impl<T> CoupledGroundState<T> {
    pub fn passed(&self) -> bool {
        self.converged && self.flags.all()
    }
}
