//! Strang splitting for `iΨ_t = −(−Δ)^αΨ + V(|Ψ|)Ψ`.
//!
//! The linear substep multiplies each mode by `e^{i|k|^{2α}t}`. The
//! nonlinear substep multiplies by `e^{−iV t}`, which leaves `|Ψ|` and hence
//! `V` unchanged, so both substeps are exact and unitary.

use num_complex::Complex;
use serde::Serialize;

use super::config::PropagatorConfig;
use crate::error::{Error, Result};
use crate::grid_spectral::{Field, FieldPair, SpectralPlan};
use crate::model::{CoupledFunctional, CoupledModel, Functional, ScalarModel};
use crate::scalar::Real;

/// Cached `e^{i|k|^{2α}τ}` for the last half step used.
struct LinearFlow<T> {
    symbol: Vec<T>,
    tau: T,
    phase: Vec<Complex<T>>,
}

impl<T: Real> LinearFlow<T> {
    fn new(symbol: Vec<T>) -> Self {
        Self { symbol, tau: T::nan(), phase: Vec::new() }
    }

    fn apply(&mut self, plan: &SpectralPlan<T>, psi: &mut Field<T>, tau: T) {
        if tau != self.tau {
            self.phase = self.symbol.iter().map(|&m| Complex::from_polar(T::one(), m * tau)).collect();
            self.tau = tau;
        }
        let mut spec = plan.forward(psi);
        for (z, &e) in spec.iter_mut().zip(&self.phase) {
            *z = *z * e;
        }
        *psi = plan.inverse(spec);
    }
}

fn rotate_by_potential<T: Real>(psi: &mut Field<T>, v: &[T], dt: T) {
    for (z, &vi) in psi.values_mut().iter_mut().zip(v) {
        *z = *z * Complex::from_polar(T::one(), -vi * dt);
    }
}

/// A state that can be advanced in time.
pub trait Evolution<T: Real> {
    type State: Clone;
    fn time(&self) -> T;
    /// One Strang step. Negative `dt` runs the flow backwards.
    fn step(&mut self, dt: T) -> Result<()>;
    fn state(&self) -> Self::State;
    fn masses(&self) -> Vec<T>;
    fn energy(&self) -> T;
}

pub struct ScalarPropagator<T: Real> {
    f: Functional<T>,
    linear: LinearFlow<T>,
    psi: Field<T>,
    time: T,
}

impl<T: Real> ScalarPropagator<T> {
    pub fn new(u0: &Field<T>, m: &ScalarModel<T>, cfg: &PropagatorConfig) -> Result<Self> {
        let f = Functional::scalar(m, *u0.grid(), cfg.convolution)?;
        Self::from_functional(f, u0)
    }

    pub fn from_functional(f: Functional<T>, u0: &Field<T>) -> Result<Self> {
        f.grid().ensure_same(u0.grid())?;
        u0.ensure_finite()?;
        let linear = LinearFlow::new(f.symbol().to_vec());
        Ok(Self { f, linear, psi: u0.clone(), time: T::zero() })
    }

    pub fn field(&self) -> &Field<T> {
        &self.psi
    }
}

pub(crate) fn blowup<T: Real>(t: T) -> Error {
    Error::BlowUp { time: t.as_f64() }
}

impl<T: Real> Evolution<T> for ScalarPropagator<T> {
    type State = Field<T>;

    fn time(&self) -> T {
        self.time
    }

    fn step(&mut self, dt: T) -> Result<()> {
        let half = T::lit(0.5) * dt;
        self.linear.apply(self.f.plan(), &mut self.psi, half);
        let v = self.f.nonlinear_potential(&self.psi.moduli());
        rotate_by_potential(&mut self.psi, &v, dt);
        self.linear.apply(self.f.plan(), &mut self.psi, half);
        self.time = self.time + dt;
        if self.psi.is_finite() {
            Ok(())
        } else {
            Err(blowup(self.time))
        }
    }

    fn state(&self) -> Field<T> {
        self.psi.clone()
    }

    fn masses(&self) -> Vec<T> {
        vec![self.psi.mass()]
    }

    fn energy(&self) -> T {
        self.f.evaluate(&self.psi, false).energy.total
    }
}

pub struct CoupledPropagator<T: Real> {
    f: CoupledFunctional<T>,
    linear: LinearFlow<T>,
    psi: [Field<T>; 2],
    time: T,
}

impl<T: Real> CoupledPropagator<T> {
    pub fn new(u0: &FieldPair<T>, m: &CoupledModel<T>, cfg: &PropagatorConfig) -> Result<Self> {
        let f = CoupledFunctional::new(m, *u0.grid(), cfg.convolution)?;
        f.grid().ensure_same(u0.grid())?;
        u0.first.ensure_finite()?;
        u0.second.ensure_finite()?;
        let linear = LinearFlow::new(f.symbol().to_vec());
        Ok(Self { f, linear, psi: [u0.first.clone(), u0.second.clone()], time: T::zero() })
    }

    pub fn pair(&self) -> FieldPair<T> {
        FieldPair { first: self.psi[0].clone(), second: self.psi[1].clone() }
    }
}

impl<T: Real> Evolution<T> for CoupledPropagator<T> {
    type State = FieldPair<T>;

    fn time(&self) -> T {
        self.time
    }

    fn step(&mut self, dt: T) -> Result<()> {
        let half = T::lit(0.5) * dt;
        for c in self.psi.iter_mut() {
            self.linear.apply(self.f.plan(), c, half);
        }
        let [v1, v2] = self.f.nonlinear_potentials(&self.psi[0].moduli(), &self.psi[1].moduli());
        rotate_by_potential(&mut self.psi[0], &v1, dt);
        rotate_by_potential(&mut self.psi[1], &v2, dt);
        for c in self.psi.iter_mut() {
            self.linear.apply(self.f.plan(), c, half);
        }
        self.time = self.time + dt;
        if self.psi.iter().all(|c| c.is_finite()) {
            Ok(())
        } else {
            Err(blowup(self.time))
        }
    }

    fn state(&self) -> FieldPair<T> {
        self.pair()
    }

    fn masses(&self) -> Vec<T> {
        self.psi.iter().map(|c| c.mass()).collect()
    }

    fn energy(&self) -> T {
        self.f.evaluate(&self.pair(), false).energy.total
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationRecord<T> {
    pub step: usize,
    pub time: T,
    pub masses: Vec<T>,
    /// Present on steps that are multiples of the conservation stride.
    pub energy: Option<T>,
}

/// Sampled evolution.
#[derive(Clone, Debug)]
pub struct Trajectory<S, T> {
    /// Snapshot times, starting at 0 and ending at `t_final`.
    pub times: Vec<T>,
    pub snapshots: Vec<S>,
    pub records: Vec<ConservationRecord<T>>,
    /// Largest `|Q(t) − Q(0)|/|Q(0)|` over all steps and components.
    pub mass_drift: T,
    /// Largest relative change of any mass across a single step.
    pub mass_step_drift: T,
    /// Largest `|E(t) − E(0)|/|E(0)|` over the energy checkpoints.
    pub energy_drift: T,
    /// Step actually used.
    pub dt: T,
}

pub type ScalarTrajectory<T> = Trajectory<Field<T>, T>;
pub type CoupledTrajectory<T> = Trajectory<FieldPair<T>, T>;

fn rel<T: Real>(a: T, b: T) -> T {
    if b == T::zero() {
        (a - b).abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Conservation bookkeeping of a run.
#[derive(Clone, Debug, Default)]
pub struct Conservation<T> {
    pub records: Vec<ConservationRecord<T>>,
    /// Largest `|Q(t) − Q(0)|/|Q(0)|` over all steps and components.
    pub mass_drift: T,
    /// Largest relative change of any mass across a single step.
    pub mass_step_drift: T,
    /// Largest `|E(t) − E(0)|/|E(0)|` over the energy checkpoints.
    pub energy_drift: T,
    /// Step actually used.
    pub dt: T,
}

/// Runs `cfg` on any [`Evolution`], calling `observe` at time 0 and after
/// every `output_stride` steps and the final step.
///
/// A blow-up aborts with [`Error::BlowUp`] carrying the time of the first
/// non-finite value; `partial` then holds the bookkeeping up to that point.
pub fn run_observed<T: Real, E: Evolution<T>>(
    ev: &mut E,
    cfg: &PropagatorConfig,
    partial: &mut Conservation<T>,
    mut observe: impl FnMut(&E) -> Result<()>,
) -> Result<()> {
    cfg.validate()?;
    let (steps, dt) = cfg.steps();
    let dt = T::lit(dt);
    let m0 = ev.masses();
    let e0 = ev.energy();
    *partial = Conservation {
        records: vec![ConservationRecord { step: 0, time: ev.time(), masses: m0.clone(), energy: Some(e0) }],
        mass_drift: T::zero(),
        mass_step_drift: T::zero(),
        energy_drift: T::zero(),
        dt,
    };
    observe(ev)?;
    let mut prev = m0.clone();
    for n in 1..=steps {
        ev.step(dt)?;
        let masses = ev.masses();
        for ((&m, &p), &q) in masses.iter().zip(&prev).zip(&m0) {
            partial.mass_step_drift = partial.mass_step_drift.max(rel(m, p));
            partial.mass_drift = partial.mass_drift.max(rel(m, q));
        }
        let check = n % cfg.conservation_check_stride == 0 || n == steps;
        let energy = check.then(|| ev.energy());
        if let Some(e) = energy {
            if !e.is_finite() {
                return Err(blowup(ev.time()));
            }
            partial.energy_drift = partial.energy_drift.max(rel(e, e0));
        }
        if check {
            partial.records.push(ConservationRecord { step: n, time: ev.time(), masses: masses.clone(), energy });
        }
        if n % cfg.output_stride == 0 || n == steps {
            observe(ev)?;
        }
        prev = masses;
    }
    Ok(())
}

/// Runs `cfg` and keeps every output snapshot.
pub fn run<T: Real, E: Evolution<T>>(ev: &mut E, cfg: &PropagatorConfig) -> Result<Trajectory<E::State, T>> {
    let mut cons = Conservation::default();
    let (mut times, mut snapshots) = (Vec::new(), Vec::new());
    run_observed(ev, cfg, &mut cons, |e| {
        times.push(e.time());
        snapshots.push(e.state());
        Ok(())
    })?;
    Ok(Trajectory {
        times,
        snapshots,
        records: cons.records,
        mass_drift: cons.mass_drift,
        mass_step_drift: cons.mass_step_drift,
        energy_drift: cons.energy_drift,
        dt: cons.dt,
    })
}

/// Evolves a scalar initial datum. The model is checked for structure only,
/// so linear (`a = λ = 0`) runs are allowed.
pub fn evolve_scalar<T: Real>(u0: &Field<T>, m: &ScalarModel<T>, cfg: &PropagatorConfig) -> Result<ScalarTrajectory<T>> {
    cfg.validate()?;
    let mut p = ScalarPropagator::new(u0, m, cfg)?;
    run(&mut p, cfg)
}

pub fn evolve_coupled<T: Real>(
    u0: &FieldPair<T>,
    m: &CoupledModel<T>,
    cfg: &PropagatorConfig,
) -> Result<CoupledTrajectory<T>> {
    cfg.validate()?;
    let mut p = CoupledPropagator::new(u0, m, cfg)?;
    run(&mut p, cfg)
}
