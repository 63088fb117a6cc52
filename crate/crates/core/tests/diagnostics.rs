use num_complex::Complex;

use fchoquard_core::diagnostics::{
    concentration_function, dilate, energy_crossing, gn_hls_probe, lr_norm_pow_sorted, random_smooth_field,
    rearrange_decreasing, scaling_curve, scaling_range, subadditivity_scan, InequalityRatios, RearrangementCheck,
};
use fchoquard_core::grid_spectral::{Field, GridSpec, SpectralPlan};
use fchoquard_core::ground_state::FlowConfig;
use fchoquard_core::model::{coulomb_energy, KernelSpec, ScalarModel};
use fchoquard_core::Error;

fn grid(m: usize, l: f64) -> GridSpec<f64> {
    GridSpec::new(2, m, l).unwrap()
}

fn reference() -> ScalarModel<f64> {
    ScalarModel { dim: 2, alpha: 0.8, beta: 1.5, a: 1.0, lambda: 1.0, s: 2.5, p: 2.0, sigma: 1.0 }
}

fn gaussian(g: GridSpec<f64>, x0: f64, y0: f64, w: f64) -> Field<f64> {
    Field::from_fn(g, |x| Complex::new((-((x[0] - x0).powi(2) + (x[1] - y0).powi(2)) / (w * w)).exp(), 0.0)).unwrap()
}

fn sorted_moduli(u: &Field<f64>) -> Vec<f64> {
    let mut v = u.moduli();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[test]
fn rearrangement_keeps_the_multiset_and_is_idempotent() {
    let g = grid(32, 16.0);
    for seed in 0..5 {
        let u = random_smooth_field(g, seed, 0);
        let star = rearrange_decreasing(&u);
        assert!(star.values().iter().all(|z| z.im == 0.0 && z.re >= 0.0));
        assert_eq!(sorted_moduli(&star), sorted_moduli(&u));
        for r in [2.0, 2.5] {
            assert_eq!(lr_norm_pow_sorted(&star, r).to_bits(), lr_norm_pow_sorted(&u, r).to_bits());
        }
        let twice = rearrange_decreasing(&star);
        assert_eq!(twice.values(), star.values());
    }
}

#[test]
fn centred_radial_profile_is_a_fixed_point() {
    let g = grid(32, 16.0);
    let u = gaussian(g, 0.0, 0.0, 2.0);
    let star = rearrange_decreasing(&u);
    let err = star.difference(&u).max_abs();
    assert!(err <= 1e-15, "{err:.3e}");
    assert_eq!(star.values()[g.ravel(&[16, 16, 0])], u.values()[g.ravel(&[16, 16, 0])]);
}

#[test]
fn rearrangement_does_not_lower_the_coulomb_energy() {
    let g = grid(32, 16.0);
    let m = reference();
    let mut u = gaussian(g, -3.0, 1.0, 1.0);
    u.add_scaled(0.7, &gaussian(g, 2.5, -2.0, 1.3));
    let k = KernelSpec::Riesz { beta: m.beta };
    let before = coulomb_energy(&u, &u, m.p, &k).unwrap();
    let after = coulomb_energy(&rearrange_decreasing(&u), &rearrange_decreasing(&u), m.p, &k).unwrap();
    assert!(after >= before * (1.0 - 1e-8), "{after} < {before}");
    let check = RearrangementCheck::new(&u, &m).unwrap();
    for (_, a, b) in check.lr_norms {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert!(check.coulomb_after > check.coulomb_before);
}

#[test]
fn concentration_of_a_point_mass_is_total() {
    let g = grid(16, 8.0);
    let mut vals = vec![Complex::new(0.0, 0.0); g.len()];
    vals[g.ravel(&[3, 11, 0])] = Complex::new(2.0, 0.0);
    let u = Field::new(g, vals).unwrap();
    for (_, m) in concentration_function(&u, &[0.5, 1.0, 3.0]).unwrap() {
        assert!((m - u.mass()).abs() <= 1e-12 * u.mass());
    }
}

#[test]
fn concentration_separates_far_bumps() {
    let g = grid(16, 16.0);
    let u = Field::from_fn(g, |x| {
        let b = |c: f64| (-((x[0] - c).powi(2) + x[1].powi(2)) / 0.5).exp();
        Complex::new(b(-4.0) + b(4.0), 0.0)
    })
    .unwrap();
    let radii = [2.0, 3.0];
    let ladder = concentration_function(&u, &radii).unwrap();
    let rho: Vec<f64> = u.values().iter().map(|z| z.norm_sqr()).collect();
    for &(r, m) in &ladder {
        let mut brute: f64 = 0.0;
        for c in 0..g.len() {
            let ci = g.unravel(c);
            let mut sum = 0.0;
            for (j, &p) in rho.iter().enumerate() {
                let cj = g.unravel(j);
                let d2: f64 = (0..2)
                    .map(|a| {
                        let d = g.signed_index((ci[a] + 16 - cj[a]) % 16) as f64 * g.spacing();
                        d * d
                    })
                    .sum();
                if d2 <= r * r {
                    sum += p;
                }
            }
            brute = brute.max(sum * g.cell_volume());
        }
        assert!((m - brute).abs() <= 1e-12 * brute);
        assert!((m - 0.5 * u.mass()).abs() <= 1e-6 * u.mass(), "R = {r}");
    }
}

#[test]
fn concentration_is_monotone_and_exhausts_the_mass() {
    let g = grid(32, 16.0);
    let u = random_smooth_field(g, 3, 0);
    let max_r = 8.0 * 2f64.sqrt();
    let radii: Vec<f64> = (1..=20).map(|i| max_r * i as f64 / 20.0).collect();
    let ladder = concentration_function(&u, &radii).unwrap();
    for w in ladder.windows(2) {
        assert!(w[1].1 >= w[0].1);
    }
    let total = ladder.last().unwrap().1;
    assert!((total - u.mass()).abs() <= 1e-10 * u.mass());
    assert!(matches!(concentration_function(&u, &[max_r * 1.01]), Err(Error::Parameter(_))));
}

#[test]
fn unit_dilation_is_the_identity() {
    let g = grid(64, 16.0);
    let m = reference();
    let mut f = gaussian(g, 0.3, -0.2, 1.5);
    f.normalize_to(1.0).unwrap();
    let pts = scaling_curve(&f, &m, &[1.0]).unwrap();
    let j = fchoquard_core::model::energy_scalar(&f, &m).unwrap().total;
    assert!((pts[0].energy - j).abs() <= 1e-10 * j.abs());
    assert!(dilate(&f, 1.0).difference(&f).norm() <= 1e-12 * f.norm());
}

#[test]
fn seminorm_scales_with_theta() {
    // The lattice sum of |k|^{2α}|f̂|² deviates from the continuum integral by
    // roughly (w/L)^{N+2α}, so the profile must be narrow relative to the box.
    let g = grid(512, 64.0);
    let m = reference();
    let mut f = gaussian(g, 0.0, 0.0, 0.6);
    f.normalize_to(1.0).unwrap();
    let base = scaling_curve(&f, &m, &[1.0]).unwrap()[0].seminorm_sq;
    for theta in [0.7, 0.85, 1.5, 2.0] {
        let p = scaling_curve(&f, &m, &[theta]).unwrap()[0];
        let expect = theta.powf(2.0 * m.alpha / 2.0) * base;
        assert!(((p.seminorm_sq - expect) / expect).abs() < 1e-6, "θ = {theta}: {} vs {expect}", p.seminorm_sq);
        assert!(p.mass_defect < 1e-10);
    }
}

#[test]
fn energy_is_negative_below_the_crossing() {
    let g = grid(64, 16.0);
    let m = reference();
    let mut f = gaussian(g, 0.0, 0.0, 0.6);
    f.normalize_to(1.0).unwrap();
    let (lo, hi) = scaling_range(&f);
    let hi = hi.min(40.0);
    let theta_c = energy_crossing(&f, &m, lo.max(0.05), hi, 1e-6).unwrap();
    let ladder: Vec<f64> = (1..=10).map(|i| lo.max(0.05) + (theta_c - lo.max(0.05)) * i as f64 / 10.5).collect();
    for p in scaling_curve(&f, &m, &ladder).unwrap() {
        assert!(p.energy < 0.0, "θ = {}", p.theta);
    }
    assert!(scaling_curve(&f, &m, &[theta_c * 1.1]).unwrap()[0].energy > 0.0);
}

#[test]
fn out_of_range_theta_is_rejected_with_the_interval() {
    let g = grid(32, 16.0);
    let f = gaussian(g, 0.0, 0.0, 1.5);
    let err = scaling_curve(&f, &reference(), &[1e-4]).unwrap_err();
    assert!(matches!(err, Error::Parameter(ref s) if s.contains("admissible interval")), "{err}");
}

#[test]
fn subadditivity_guard_and_symmetry() {
    let m = reference();
    let g = grid(64, 16.0);
    let cfg = FlowConfig { multistart: 1, ..FlowConfig::default() };
    assert!(matches!(subadditivity_scan(&m, &[0.01], g, &cfg), Err(Error::Parameter(_))));
    assert!(matches!(subadditivity_scan(&m, &[0.97], g, &cfg), Err(Error::Parameter(_))));
    let scan = subadditivity_scan(&m, &[0.3, 0.7], g, &cfg).unwrap();
    let (a, b) = (scan.margins[0].unwrap(), scan.margins[1].unwrap());
    assert!(((a - b) / a).abs() < 1e-6);
    assert!(scan.strictly_subadditive(), "{:?}", scan.margins);
}

#[test]
fn gn_ratio_is_scale_invariant() {
    let g = grid(128, 32.0);
    let m = reference();
    let r = InequalityRatios::new(&m, g).unwrap();
    let base = r.gn(&gaussian(g, 0.0, 0.0, 1.5));
    for w in [1.0, 2.0, 3.0] {
        let v = r.gn(&gaussian(g, 0.0, 0.0, w));
        assert!(((v - base) / base).abs() < 1e-3, "w = {w}: {v} vs {base}");
    }
}

#[test]
fn probe_constants_are_finite_and_grid_stable() {
    let m = reference();
    let coarse = gn_hls_probe(100, &m, grid(64, 16.0), 7).unwrap();
    assert!(coarse.gn_max.is_finite() && coarse.hls_max.is_finite());
    assert!(coarse.gn_max > 0.0 && coarse.hls_max > 0.0);
    let fine = gn_hls_probe(100, &m, grid(128, 16.0), 7).unwrap();
    assert!(((fine.gn_max - coarse.gn_max) / fine.gn_max).abs() < 0.2);
    assert!(((fine.hls_max - coarse.hls_max) / fine.hls_max).abs() < 0.2);
    assert!(matches!(gn_hls_probe(0, &m, grid(64, 16.0), 7), Err(Error::Parameter(_))));
    let _ = SpectralPlan::new(grid(8, 1.0));
}
