use super::config::FlowConfig;
use super::init::{boundary_mass, centering_shift};
use super::scalar::prepare_init;
use super::solver::{align_phase, minimize, relative_residuals, Objective, Point};
use super::state::{is_positive_profile, CoupledGroundState, SolveStatus, TheoremFlags};
use crate::error::{param, Result};
use crate::grid_spectral::{Field, FieldPair, GridSpec, SpectralPlan};
use crate::model::{validate_coupled, CoupledFunctional, CoupledModel};
use crate::scalar::Real;

const POLISH_ROUNDS: usize = 3;

struct CoupledObjective<'a, T: Real> {
    f: &'a CoupledFunctional<T>,
}

impl<T: Real> Objective<T> for CoupledObjective<'_, T> {
    fn plan(&self) -> &SpectralPlan<T> {
        self.f.plan()
    }

    fn symbol(&self) -> &[T] {
        self.f.symbol()
    }

    fn eval(&self, u: &[Field<T>]) -> Point<T> {
        let pair = FieldPair { first: u[0].clone(), second: u[1].clone() };
        let ev = self.f.evaluate(&pair, true);
        let [g1, g2] = ev.gradient.clone().expect("gradient requested");
        Point {
            u: u.to_vec(),
            energy: ev.energy.total,
            grad: vec![g1, g2],
            omega: ev.omegas().to_vec(),
        }
    }
}

/// Minimizes the coupled energy on `‖u_1‖² = σ_1`, `‖u_2‖² = σ_2`.
///
/// Both components share one line search. The reported pair is gauge fixed:
/// each component's largest-modulus cell is positive real and the total
/// density centroid sits on the box centre unless recentring keeps undoing
/// convergence.
pub fn solve_coupled<T: Real>(
    m: &CoupledModel<T>,
    grid: GridSpec<T>,
    cfg: &FlowConfig,
    init: Option<&FieldPair<T>>,
) -> Result<CoupledGroundState<T>> {
    let report = validate_coupled(m);
    if !report.ok() {
        return Err(param(report.to_string()));
    }
    cfg.validate()?;
    let f = CoupledFunctional::new(m, grid, cfg.convolution)?;
    let sigma = [m.sigma1, m.sigma2];
    let u0 = vec![
        prepare_init(init.map(|p| &p.first), grid, sigma[0])?,
        prepare_init(init.map(|p| &p.second), grid, sigma[1])?,
    ];
    let obj = CoupledObjective { f: &f };
    let tol = T::lit(cfg.grad_tol);
    let mut out = minimize(&obj, u0, &sigma, cfg);
    let (mut iterations, mut evaluations) = (out.iterations, out.evaluations);
    let mut history = std::mem::take(&mut out.history);
    let mut round = 0;
    let (point, status) = loop {
        round += 1;
        let mut u = out.point.u.clone();
        for c in u.iter_mut() {
            align_phase(c);
        }
        let density: Vec<T> = u[0]
            .values()
            .iter()
            .zip(u[1].values())
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect();
        let shift = centering_shift(&grid, &density);
        let moved = shift.iter().any(|&s| s != 0);
        let unshifted = u.clone();
        if moved {
            u = u.iter().map(|c| c.shifted(&shift[..grid.dim()])).collect();
        }
        let point = obj.eval(&u);
        evaluations += 1;
        let worst = relative_residuals(&point).into_iter().fold(T::zero(), T::max);
        let settled = worst < tol || out.status != SolveStatus::Converged;
        if !moved || settled {
            break (point, out.status);
        }
        if round == POLISH_ROUNDS {
            // the shift keeps breaking convergence, so keep the phase-aligned minimizer
            evaluations += 1;
            break (obj.eval(&unshifted), out.status);
        }
        out = minimize(&obj, point.u, &sigma, cfg);
        iterations += out.iterations;
        evaluations += out.evaluations;
        let offset = history.len();
        history.extend(out.history.drain(..).map(|mut r| {
            r.iteration += offset;
            r
        }));
    };

    let res = relative_residuals(&point);
    let converged = res.iter().all(|&r| r < tol);
    let status = match (converged, status) {
        (true, _) => SolveStatus::Converged,
        (false, SolveStatus::Converged) => SolveStatus::Stalled,
        (false, s) => s,
    };
    let pair = FieldPair { first: point.u[0].clone(), second: point.u[1].clone() };
    let parts = f.evaluate(&pair, false).energy;
    let min_mod = |u: &Field<T>| u.values().iter().map(|z| z.norm()).fold(T::infinity(), T::min);
    let flags = TheoremFlags {
        energy_negative: parts.total < T::zero(),
        multiplier_positive: point.omega.iter().all(|&w| w > T::zero()),
        profile_positive: is_positive_profile(&pair.first) && is_positive_profile(&pair.second),
    };
    let bmass = boundary_mass(&pair.first) + boundary_mass(&pair.second);
    let mut warnings = Vec::new();
    if bmass > T::lit(1e-6) * (sigma[0] + sigma[1]) {
        warnings.push(format!(
            "boundary mass {bmass:.3e} exceeds 1e-6·(σ1+σ2); the box may be too small"
        ));
    }
    if !converged {
        warnings.push(format!("not converged ({status:?}), residuals {:.3e}, {:.3e}", res[0], res[1]));
    }
    Ok(CoupledGroundState {
        min_modulus: (min_mod(&pair.first), min_mod(&pair.second)),
        u1: pair.first,
        u2: pair.second,
        omega1: point.omega[0],
        omega2: point.omega[1],
        energy: parts.total,
        energy_parts: parts,
        residuals: (res[0], res[1]),
        iterations,
        evaluations,
        converged,
        status,
        flags,
        boundary_mass: bmass,
        warnings,
        history,
    })
}
