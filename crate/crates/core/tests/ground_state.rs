use fchoquard_core::diagnostics::{rearrange_decreasing, recenter};
use fchoquard_core::grid_spectral::{ConvolutionMode, Field, FieldPair, GridSpec};
use fchoquard_core::ground_state::{
    coupled_multipliers, solve_coupled, solve_scalar, FlowConfig, SolveStatus,
};
use fchoquard_core::model::{energy_scalar, CoupledModel, ScalarModel};
use fchoquard_core::Error;

fn reference() -> ScalarModel<f64> {
    ScalarModel { dim: 2, alpha: 0.8, beta: 1.5, a: 1.0, lambda: 1.0, s: 2.5, p: 2.0, sigma: 1.0 }
}

fn grid(m: usize, l: f64) -> GridSpec<f64> {
    GridSpec::new(2, m, l).unwrap()
}

fn rel_l2(a: &Field<f64>, b: &Field<f64>) -> f64 {
    a.difference(b).norm() / b.norm()
}

#[test]
fn reference_model_passes_theorem_flags() {
    let t = std::time::Instant::now();
    let gs = solve_scalar(&reference(), grid(128, 16.0), &FlowConfig::default(), None).unwrap();
    eprintln!(
        "J = {:.10} ω = {:.10} residual = {:.2e} iterations = {} evals = {} ({:?})",
        gs.energy, gs.omega, gs.residual, gs.iterations, gs.evaluations, t.elapsed()
    );
    assert!(gs.converged, "{:?}", gs.warnings);
    assert!(gs.residual < 1e-8);
    assert!(gs.passed());
    assert!(gs.energy < 0.0 && gs.omega > 0.0 && gs.min_modulus > 0.0);
    assert!(((gs.u.mass() - 1.0) / 1.0).abs() < 1e-12);
    for w in gs.history.windows(2) {
        assert!(w[1].energy <= w[0].energy + 1e-12 * w[0].energy.abs());
    }
}

#[test]
fn reference_energy_is_grid_converged() {
    let cfg = FlowConfig::default();
    let coarse = solve_scalar(&reference(), grid(128, 16.0), &cfg, None).unwrap();
    let fine = solve_scalar(&reference(), grid(256, 16.0), &cfg, None).unwrap();
    eprintln!("J128 = {:.12} J256 = {:.12} iters {}", coarse.energy, fine.energy, fine.iterations);
    assert!(fine.converged);
    assert!(((coarse.energy - fine.energy) / fine.energy).abs() < 1e-4);
}

#[test]
fn converged_state_is_a_fixed_point() {
    let m = reference();
    let g = grid(64, 16.0);
    let cfg = FlowConfig::default();
    let first = solve_scalar(&m, g, &cfg, None).unwrap();
    let again = solve_scalar(&m, g, &cfg, Some(&first.u)).unwrap();
    assert!(again.converged);
    assert!(again.iterations <= 2, "{}", again.iterations);
    assert!(((again.energy - first.energy) / first.energy).abs() < 1e-12);
}

#[test]
fn pure_hartree_minimizer_is_symmetric_decreasing() {
    let m = ScalarModel { alpha: 1.0, a: 0.0, sigma: 4.0, ..reference() };
    let gs = solve_scalar(&m, grid(128, 28.0), &FlowConfig::default(), None).unwrap();
    assert!(gs.passed(), "{:?}", gs.warnings);
    let u = recenter(&gs.u);
    let err = rel_l2(&rearrange_decreasing(&u), &u);
    assert!(err < 1e-6, "{err:.3e}");
}

#[test]
fn gauge_fixing_removes_phase_and_translation() {
    let m = reference();
    let g = grid(64, 16.0);
    let cfg = FlowConfig::default();
    let base = solve_scalar(&m, g, &cfg, None).unwrap();
    let mut moved = base.u.shifted(&[5, -3]);
    moved.rotate_phase(1.1);
    // perturb away from the fixed point so the flow has work to do
    let bump = Field::from_fn(g, |x| {
        num_complex::Complex::new((-(x[0] - 1.0).powi(2) - x[1].powi(2)).exp() * 0.2, 0.0)
    })
    .unwrap();
    moved.add_scaled(1.0, &bump);
    let other = solve_scalar(&m, g, &cfg, Some(&moved)).unwrap();
    assert!(other.converged);
    assert!(rel_l2(&other.u, &base.u) < 1e-6, "{:.3e}", rel_l2(&other.u, &base.u));
    assert!(((other.energy - base.energy) / base.energy).abs() < 1e-8);
}

#[test]
fn invalid_model_and_zero_init_are_rejected() {
    let bad = ScalarModel { alpha: 0.5, beta: 1.0, ..reference() };
    let err = solve_scalar(&bad, grid(32, 16.0), &FlowConfig::default(), None).unwrap_err();
    assert!(matches!(err, Error::Parameter(_)), "{err}");
    let zero = Field::zeros(grid(32, 16.0));
    let err = solve_scalar(&reference(), grid(32, 16.0), &FlowConfig::default(), Some(&zero)).unwrap_err();
    assert!(matches!(err, Error::Data(_)), "{err}");
}

#[test]
fn iteration_cap_reports_nonconvergence() {
    let cfg = FlowConfig { max_iters: 3, ..FlowConfig::default() };
    let gs = solve_scalar(&reference(), grid(64, 16.0), &cfg, None).unwrap();
    assert!(!gs.converged);
    assert_eq!(gs.status, SolveStatus::MaxIterations);
    assert!(!gs.passed());
}

#[test]
fn periodic_mode_solves_too() {
    let cfg = FlowConfig { convolution: ConvolutionMode::Periodic, ..FlowConfig::default() };
    let gs = solve_scalar(&reference(), grid(64, 16.0), &cfg, None).unwrap();
    assert!(gs.passed());
}

#[test]
fn wide_profile_keeps_its_convergence() {
    // about 9% of the mass sits in the boundary layer, so recentring moves the energy
    let m = ScalarModel { a: 0.0, lambda: 0.8, sigma: 0.8, ..reference() };
    let gs = solve_scalar(&m, grid(128, 16.0), &FlowConfig::default(), None).unwrap();
    assert!(gs.boundary_mass > 0.05);
    assert!(gs.converged, "{:?} with residual {:e}", gs.status, gs.residual);
}

fn coupled() -> CoupledModel<f64> {
    CoupledModel {
        dim: 2,
        alpha: 0.8,
        beta: 1.5,
        lambda1: 1.0,
        lambda2: 0.8,
        c: 0.5,
        p1: 2.0,
        p2: 2.0,
        q: 2.2,
        sigma1: 1.0,
        sigma2: 0.8,
    }
}

#[test]
fn coupled_ground_state_beats_decoupled_sum() {
    let m = coupled();
    let g = grid(64, 16.0);
    let cfg = FlowConfig::default();
    let gs = solve_coupled(&m, g, &cfg, None).unwrap();
    assert!(gs.passed(), "{:?}", gs.warnings);
    assert!(gs.residuals.0 < 1e-8 && gs.residuals.1 < 1e-8);
    assert!(((gs.u1.mass() - 1.0)).abs() < 1e-12 && ((gs.u2.mass() - 0.8) / 0.8).abs() < 1e-12);
    let j1 = solve_scalar(&m.component(1), g, &cfg, None).unwrap();
    let j2 = solve_scalar(&m.component(2), g, &cfg, None).unwrap();
    eprintln!("E = {:.8} J1 + J2 = {:.8}", gs.energy, j1.energy + j2.energy);
    assert!(gs.energy < j1.energy + j2.energy - 1e-3);
    let (w1, w2) = coupled_multipliers(&FieldPair::new(gs.u1.clone(), gs.u2.clone()).unwrap(), &m).unwrap();
    assert!((w1 - gs.omega1).abs() < 1e-10 && (w2 - gs.omega2).abs() < 1e-10);
}

#[test]
fn tiny_coupling_decouples() {
    let m = CoupledModel { c: 1e-12, ..coupled() };
    let g = grid(64, 16.0);
    let cfg = FlowConfig::default();
    let gs = solve_coupled(&m, g, &cfg, None).unwrap();
    assert!(gs.converged);
    let s1 = solve_scalar(&m.component(1), g, &cfg, None).unwrap();
    let s2 = solve_scalar(&m.component(2), g, &cfg, None).unwrap();
    let e1 = energy_scalar(&gs.u1, &m.component(1)).unwrap().total;
    let e2 = energy_scalar(&gs.u2, &m.component(2)).unwrap().total;
    assert!(((e1 - s1.energy) / s1.energy).abs() < 1e-4);
    assert!(((e2 - s2.energy) / s2.energy).abs() < 1e-4);
}

#[test]
fn symmetric_model_keeps_components_equal() {
    let m = CoupledModel { lambda2: 1.0, sigma2: 1.0, p2: 2.0, ..coupled() };
    let gs = solve_coupled(&m, grid(64, 16.0), &FlowConfig::default(), None).unwrap();
    assert!(gs.converged);
    for rec in &gs.history {
        assert!((rec.omega[0] - rec.omega[1]).abs() <= 1e-8 * rec.omega[0].abs());
    }
    assert!(rel_l2(&gs.u1, &gs.u2) < 1e-8);
    assert!((gs.omega1 - gs.omega2).abs() < 1e-8 * gs.omega1);
}
