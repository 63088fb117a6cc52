//! Riemannian preconditioned nonlinear conjugate gradients on a product of
//! L² spheres.

use num_complex::Complex;

use super::config::FlowConfig;
use super::state::{IterationRecord, SolveStatus};
use crate::grid_spectral::{Field, SpectralPlan};
use crate::scalar::Real;

/// Energy landscape over `K` field components.
pub(crate) trait Objective<T: Real> {
    fn plan(&self) -> &SpectralPlan<T>;
    fn symbol(&self) -> &[T];
    /// Energy, L² gradients and Lagrange multipliers.
    fn eval(&self, u: &[Field<T>]) -> Point<T>;
    /// Optional energy-lowering projection applied between iterations.
    fn symmetrize(&self, _u: &[Field<T>]) -> Option<Vec<Field<T>>> {
        None
    }
}

#[derive(Clone)]
pub(crate) struct Point<T> {
    pub u: Vec<Field<T>>,
    pub energy: T,
    pub grad: Vec<Field<T>>,
    pub omega: Vec<T>,
}

pub(crate) struct Outcome<T> {
    pub point: Point<T>,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: SolveStatus,
    pub history: Vec<IterationRecord<T>>,
}

const DIVERGENCE_LIMIT: usize = 40;

fn dot<T: Real>(a: &[Field<T>], b: &[Field<T>]) -> T {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

fn residual_fields<T: Real>(p: &Point<T>) -> Vec<Field<T>> {
    p.grad
        .iter()
        .zip(&p.u)
        .zip(&p.omega)
        .map(|((g, u), &w)| {
            let mut r = g.clone();
            r.add_scaled(w, u);
            r
        })
        .collect()
}

pub(crate) fn relative_residuals<T: Real>(p: &Point<T>) -> Vec<T> {
    residual_fields(p)
        .iter()
        .zip(&p.u)
        .map(|(r, u)| r.norm() / u.norm())
        .collect()
}

fn project_tangent<T: Real>(v: &mut [Field<T>], u: &[Field<T>], sigma: &[T]) {
    for ((vj, uj), &s) in v.iter_mut().zip(u).zip(sigma) {
        let c = uj.inner(vj) / s;
        vj.add_scaled(-c, uj);
    }
}

fn max_of<T: Real>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, &x| if x > m { x } else { m })
}

/// Point on the geodesic-like curve `u_j cos(t n_j) + (d_j/n_j) sin(t n_j)`
/// and its velocity.
struct Curve<'a, T> {
    u: &'a [Field<T>],
    d: &'a [Field<T>],
    rate: Vec<T>,
}

impl<T: Real> Curve<'_, T> {
    fn at(&self, t: T, sigma: &[T]) -> Vec<Field<T>> {
        (0..self.u.len())
            .map(|j| {
                let n = self.rate[j];
                if n == T::zero() {
                    return self.u[j].clone();
                }
                let a = t * n;
                let mut v = self.u[j].scaled(a.cos());
                v.add_scaled(a.sin() / n, &self.d[j]);
                v.normalize_to(sigma[j]).expect("retraction stays on the sphere");
                v
            })
            .collect()
    }

    fn velocity(&self, t: T) -> Vec<Field<T>> {
        (0..self.u.len())
            .map(|j| {
                let n = self.rate[j];
                let a = t * n;
                let mut v = self.d[j].scaled(a.cos());
                v.add_scaled(-(a.sin() * n), &self.u[j]);
                v
            })
            .collect()
    }
}

pub(crate) fn minimize<T: Real, O: Objective<T>>(
    obj: &O,
    init: Vec<Field<T>>,
    sigma: &[T],
    cfg: &FlowConfig,
) -> Outcome<T> {
    let inv_tau = T::lit(1.0 / cfg.tau);
    let precond: Vec<T> = obj.symbol().iter().map(|&m| T::one() / (m + inv_tau)).collect();
    let grad_tol = T::lit(cfg.grad_tol);
    let energy_tol = T::lit(cfg.energy_tol);
    let accept_slack = T::lit(1e-12);
    let factor = T::lit(cfg.backtrack_factor);

    let mut evaluations = 1;
    let mut point = obj.eval(&init);
    let mut history = Vec::new();
    let mut prev: Option<(Vec<Field<T>>, Vec<Field<T>>, T)> = None; // (d, r, ⟨z, r⟩)
    let mut failures = 0;
    let mut stall = 0;
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;
    let mut stalled = false;

    loop {
        let r = residual_fields(&point);
        let residuals: Vec<T> = r.iter().zip(&point.u).map(|(r, u)| r.norm() / u.norm()).collect();
        let worst = max_of(&residuals);
        history.push(IterationRecord {
            iteration: iterations,
            energy: point.energy,
            omega: point.omega.clone(),
            residual: residuals.clone(),
        });
        if worst < grad_tol {
            status = SolveStatus::Converged;
            break;
        }
        if stalled {
            status = SolveStatus::Stalled;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }
        iterations += 1;

        if cfg.symmetrize_every > 0 && iterations % cfg.symmetrize_every == 0 {
            if let Some(v) = obj.symmetrize(&point.u) {
                evaluations += 1;
                let cand = obj.eval(&v);
                if cand.energy <= point.energy {
                    point = cand;
                    prev = None;
                    continue;
                }
            }
        }

        let mut z: Vec<Field<T>> = r.iter().map(|rj| obj.plan().apply_multiplier(rj, &precond)).collect();
        project_tangent(&mut z, &point.u, sigma);
        let zr = dot(&z, &r);
        let mut d: Vec<Field<T>> = z.iter().map(|zj| zj.scaled(-T::one())).collect();
        if let Some((d_prev, r_prev, zr_prev)) = &prev {
            let diff: Vec<Field<T>> = r.iter().zip(r_prev).map(|(a, b)| a.difference(b)).collect();
            let beta = (dot(&z, &diff) / *zr_prev).max(T::zero());
            for (dj, pj) in d.iter_mut().zip(d_prev) {
                dj.add_scaled(beta, pj);
            }
            project_tangent(&mut d, &point.u, sigma);
            if dot(&d, &r) >= T::zero() {
                d = z.iter().map(|zj| zj.scaled(-T::one())).collect();
            }
        }

        let rate: Vec<T> = d.iter().zip(sigma).map(|(dj, &s)| dj.norm() / s.sqrt()).collect();
        let n_max = max_of(&rate);
        if !(n_max > T::zero()) {
            status = SolveStatus::Stalled;
            break;
        }
        let curve = Curve { u: &point.u, d: &d, rate };
        let slope = |p: &Point<T>, t: T| dot(&p.grad, &curve.velocity(t));
        let s0 = dot(&point.grad, &d);
        let t0 = T::one().min(T::lit(0.5) / n_max);
        let trial = obj.eval(&curve.at(t0, sigma));
        evaluations += 1;
        let s1 = slope(&trial, t0);
        let mut t = if s1 > s0 { t0 * s0 / (s0 - s1) } else { t0 + t0 };
        t = t.max(T::lit(0.1) * t0).min(T::lit(4.0) * t0);

        let bound = point.energy + accept_slack * point.energy.abs();
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let cand = obj.eval(&curve.at(t, sigma));
            evaluations += 1;
            if cand.energy <= bound {
                accepted = Some(cand);
                break;
            }
            t = t * factor;
        }
        match accepted {
            None => {
                failures += 1;
                prev = None;
                if failures >= DIVERGENCE_LIMIT {
                    status = SolveStatus::Diverged;
                    break;
                }
            }
            Some(cand) => {
                failures = 0;
                let change = (cand.energy - point.energy).abs();
                if change < energy_tol * cand.energy.abs() {
                    stall += 1;
                } else {
                    stall = 0;
                }
                prev = Some((d, r, zr));
                point = cand;
                stalled = stall >= cfg.stall_window;
            }
        }
    }
    Outcome { point, iterations, evaluations, status, history }
}

/// Multiplies every cell by the unit phase that makes the largest-modulus
/// cell positive real.
pub(crate) fn align_phase<T: Real>(u: &mut Field<T>) {
    let z: Complex<T> = u.values()[u.argmax_abs()];
    if z.norm() > T::zero() {
        u.rotate_phase(-z.arg());
    }
}
