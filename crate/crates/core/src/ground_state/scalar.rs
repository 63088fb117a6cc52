use super::config::FlowConfig;
use super::init::{boundary_mass, centering_shift, gaussian_init, multistart_init};
use super::solver::{align_phase, minimize, relative_residuals, Objective, Outcome, Point};
use super::state::{is_positive_profile, GroundState, SolveStatus, TheoremFlags};
use crate::diagnostics::rearrange_decreasing;
use crate::error::{data, param, Result};
use crate::grid_spectral::{Field, GridSpec, SpectralPlan};
use crate::model::{validate_general, validate_scalar, Functional, GeneralModel, ScalarModel};
use crate::scalar::Real;

const POLISH_ROUNDS: usize = 3;
const BOUNDARY_WARNING: f64 = 1e-6;

struct ScalarObjective<'a, T: Real> {
    f: &'a Functional<T>,
    symmetrize: bool,
}

impl<T: Real> Objective<T> for ScalarObjective<'_, T> {
    fn plan(&self) -> &SpectralPlan<T> {
        self.f.plan()
    }

    fn symbol(&self) -> &[T] {
        self.f.symbol()
    }

    fn eval(&self, u: &[Field<T>]) -> Point<T> {
        let ev = self.f.evaluate(&u[0], true);
        let omega = ev.omega();
        Point {
            u: u.to_vec(),
            energy: ev.energy.total,
            grad: vec![ev.gradient.expect("gradient requested")],
            omega: vec![omega],
        }
    }

    fn symmetrize(&self, u: &[Field<T>]) -> Option<Vec<Field<T>>> {
        self.symmetrize.then(|| vec![rearrange_decreasing(&u[0])])
    }
}

pub(crate) fn prepare_init<T: Real>(init: Option<&Field<T>>, grid: GridSpec<T>, sigma: T) -> Result<Field<T>> {
    match init {
        None => gaussian_init(grid, sigma),
        Some(u) => {
            grid.ensure_same(u.grid())?;
            u.ensure_finite()?;
            let mut u = u.clone();
            if !(u.mass() > T::zero()) {
                return Err(data("initial field is zero"));
            }
            u.normalize_to(sigma)?;
            Ok(u)
        }
    }
}

/// Minimizes the scalar energy on `‖u‖² = σ`.
///
/// Fails with a parameter error when the model is outside its admissible
/// window. A run that does not converge is returned with `converged = false`
/// and its status.
pub fn solve_scalar<T: Real>(
    m: &ScalarModel<T>,
    grid: GridSpec<T>,
    cfg: &FlowConfig,
    init: Option<&Field<T>>,
) -> Result<GroundState<T>> {
    let report = validate_scalar(m);
    if !report.ok() {
        return Err(param(report.to_string()));
    }
    cfg.validate()?;
    let f = Functional::scalar(m, grid, cfg.convolution)?;
    solve_functional(&f, m.sigma, cfg, init)
}

/// [`solve_scalar`] for a multi-term model.
pub fn solve_general<T: Real>(
    m: &GeneralModel<T>,
    grid: GridSpec<T>,
    cfg: &FlowConfig,
    init: Option<&Field<T>>,
) -> Result<GroundState<T>> {
    let report = validate_general(m);
    if !report.ok() {
        return Err(param(report.to_string()));
    }
    cfg.validate()?;
    let f = Functional::general(m, grid, cfg.convolution)?;
    solve_functional(&f, m.sigma, cfg, init)
}

/// Best of several starts of [`solve_scalar`].
#[derive(Clone, Debug)]
pub struct MultiStart<T> {
    /// Lowest-energy converged state, or the lowest-energy state when no
    /// start converged.
    pub best: GroundState<T>,
    pub energies: Vec<T>,
    pub converged: Vec<bool>,
}

/// Runs `cfg.multistart` starts from [`multistart_init`] with `cfg.seed`.
pub fn solve_scalar_multistart<T: Real>(
    m: &ScalarModel<T>,
    grid: GridSpec<T>,
    cfg: &FlowConfig,
) -> Result<MultiStart<T>> {
    let report = validate_scalar(m);
    if !report.ok() {
        return Err(param(report.to_string()));
    }
    cfg.validate()?;
    let f = Functional::scalar(m, grid, cfg.convolution)?;
    let mut best: Option<GroundState<T>> = None;
    let (mut energies, mut converged) = (Vec::new(), Vec::new());
    for index in 0..cfg.multistart {
        let init = multistart_init(grid, m.sigma, cfg.seed, index)?;
        let gs = solve_functional(&f, m.sigma, cfg, Some(&init))?;
        energies.push(gs.energy);
        converged.push(gs.converged);
        let better = match &best {
            None => true,
            Some(b) => (gs.converged && !b.converged) || (gs.converged == b.converged && gs.energy < b.energy),
        };
        if better {
            best = Some(gs);
        }
    }
    Ok(MultiStart { best: best.expect("at least one start"), energies, converged })
}

pub(crate) fn solve_functional<T: Real>(
    f: &Functional<T>,
    sigma: T,
    cfg: &FlowConfig,
    init: Option<&Field<T>>,
) -> Result<GroundState<T>> {
    let grid = *f.grid();
    let u0 = prepare_init(init, grid, sigma)?;
    let obj = ScalarObjective { f, symmetrize: cfg.symmetrize_every > 0 };
    let tol = T::lit(cfg.grad_tol);
    let mut out: Outcome<T> = minimize(&obj, vec![u0], &[sigma], cfg);
    let (mut iterations, mut evaluations) = (out.iterations, out.evaluations);
    let mut history = std::mem::take(&mut out.history);
    let mut round = 0;
    let (point, status) = loop {
        round += 1;
        let mut u = out.point.u[0].clone();
        align_phase(&mut u);
        let shift = centering_shift(&grid, &u.values().iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
        let moved = shift.iter().any(|&s| s != 0);
        let unshifted = u.clone();
        if moved {
            u = u.shifted(&shift[..grid.dim()]);
        }
        let point = obj.eval(&[u]);
        evaluations += 1;
        let res = relative_residuals(&point)[0];
        let settled = res < tol || out.status != SolveStatus::Converged;
        if !moved || settled {
            break (point, out.status);
        }
        if round == POLISH_ROUNDS {
            // the shift keeps breaking convergence, so keep the phase-aligned minimizer
            evaluations += 1;
            break (obj.eval(&[unshifted]), out.status);
        }
        out = minimize(&obj, point.u, &[sigma], cfg);
        iterations += out.iterations;
        evaluations += out.evaluations;
        let offset = history.len();
        history.extend(out.history.drain(..).map(|mut r| {
            r.iteration += offset;
            r
        }));
    };

    let u = point.u[0].clone();
    let parts = f.evaluate(&u, false).energy;
    let residual = relative_residuals(&point)[0];
    let converged = residual < tol;
    let status = match (converged, status) {
        (true, _) => SolveStatus::Converged,
        (false, SolveStatus::Converged) => SolveStatus::Stalled,
        (false, s) => s,
    };
    let omega = point.omega[0];
    let min_modulus = u.values().iter().map(|z| z.norm()).fold(T::infinity(), |a, b| a.min(b));
    let flags = TheoremFlags {
        energy_negative: parts.total < T::zero(),
        multiplier_positive: omega > T::zero(),
        profile_positive: is_positive_profile(&u),
    };
    let bmass = boundary_mass(&u);
    let mut warnings = Vec::new();
    if bmass > T::lit(BOUNDARY_WARNING) * sigma {
        warnings.push(format!(
            "boundary mass {bmass:.3e} exceeds 1e-6·σ; the box may be too small"
        ));
    }
    if !converged {
        warnings.push(format!("not converged ({status:?}), residual {residual:.3e}"));
    }
    if converged && !flags.all() {
        warnings.push(format!("theorem flags violated: {flags:?}"));
    }
    Ok(GroundState {
        u,
        omega,
        energy: parts.total,
        energy_parts: parts,
        residual,
        iterations,
        evaluations,
        converged,
        status,
        flags,
        min_modulus,
        boundary_mass: bmass,
        warnings,
        history,
    })
}
