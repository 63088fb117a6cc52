use fchoquard_core::diagnostics::{
    concentration_function, dilate, random_smooth_field, rearrange_decreasing, scaling_curve,
};
use fchoquard_core::dynamics::{modulated_distance, Evolution, PropagatorConfig, ScalarPropagator};
use fchoquard_core::grid_spectral::{riesz_convolve, ConvolutionMode, Field, GridSpec, SpectralPlan};
use fchoquard_core::io::{FieldDump, Table};
use fchoquard_core::model::{coulomb_energy, energy_general, energy_scalar, Functional, KernelSpec, ScalarModel};
use num_complex::Complex;
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = GridSpec<f64>> {
    (1usize..=2, prop::sample::select(vec![8usize, 16, 32]), 2.0f64..20.0)
        .prop_map(|(d, m, l)| GridSpec::new(d, m, l).unwrap())
}

fn field_on(grid: GridSpec<f64>) -> impl Strategy<Value = Field<f64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), grid.len()).prop_map(move |v| {
        Field::new(grid, v.into_iter().map(|(a, b)| Complex::new(a, b)).collect()).unwrap()
    })
}

fn any_field() -> impl Strategy<Value = Field<f64>> {
    grid_strategy().prop_flat_map(field_on)
}

fn density_on(grid: GridSpec<f64>) -> impl Strategy<Value = Field<f64>> {
    prop::collection::vec(0.0f64..1.0, grid.len())
        .prop_map(move |v| Field::from_real(grid, &v).unwrap())
}

fn smooth(dim: usize, points: usize, length: f64, seed: u64, sigma: f64) -> Field<f64> {
    let mut u = random_smooth_field(GridSpec::new(dim, points, length).unwrap(), seed, 0);
    u.normalize_to(sigma).unwrap();
    u
}

fn model(dim: usize, alpha: f64, beta_frac: f64, p_frac: f64, s_frac: f64) -> ScalarModel<f64> {
    let n = dim as f64;
    // The Hartree window [2, (N+2α+β)/N) is non-empty only for β > N − 2α.
    let beta = n - 2.0 * alpha * (1.0 - beta_frac);
    let p_up = (n + 2.0 * alpha + beta) / n;
    let s_up = 2.0 + 4.0 * alpha / n;
    ScalarModel {
        dim,
        alpha,
        beta,
        a: 1.0,
        lambda: 1.0,
        s: 2.0 + s_frac * (s_up - 2.0),
        p: 2.0 + p_frac * (p_up - 2.0),
        sigma: 1.0,
    }
}

fn model_strategy(dim: usize) -> impl Strategy<Value = ScalarModel<f64>> {
    (0.3f64..=1.0, 0.1f64..0.9, 0.0f64..0.9, 0.05f64..0.95)
        .prop_map(move |(a, b, p, s)| model(dim, a, b, p, s))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fft_round_trip(u in any_field()) {
        let plan = SpectralPlan::new(*u.grid());
        let back = plan.inverse(plan.forward(&u));
        let err = back.difference(&u).norm() / u.norm();
        prop_assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn fractional_laplacian_is_self_adjoint(
        (u, v) in grid_strategy().prop_flat_map(|g| (field_on(g), field_on(g))),
        alpha in 0.05f64..=1.0,
    ) {
        let plan = SpectralPlan::new(*u.grid());
        let lu = plan.apply_fractional_laplacian(&u, alpha).unwrap();
        let lv = plan.apply_fractional_laplacian(&v, alpha).unwrap();
        let scale = lu.norm() * v.norm() + u.norm() * lv.norm();
        for w in [v.clone(), { let mut iv = v.clone(); iv.rotate_phase(std::f64::consts::FRAC_PI_2); iv }] {
            let lw = plan.apply_fractional_laplacian(&w, alpha).unwrap();
            prop_assert!((lu.inner(&w) - u.inner(&lw)).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn bessel_inverts_shifted_operator(u in any_field(), tau in 0.1f64..10.0, alpha in 0.05f64..=1.0) {
        let plan = SpectralPlan::new(*u.grid());
        let w = plan.bessel_apply(&u, tau, alpha).unwrap();
        let mut back = plan.apply_fractional_laplacian(&w, alpha).unwrap();
        back.add_scaled(tau, &w);
        prop_assert!(back.difference(&u).norm() < 1e-10 * u.norm());
    }

    #[test]
    fn riesz_convolution_is_a_symmetric_form(
        (f, g) in grid_strategy().prop_flat_map(|g| (density_on(g), density_on(g))),
        beta_frac in 0.05f64..0.95,
    ) {
        let beta = beta_frac * f.grid().dim() as f64;
        let kf = riesz_convolve(&f, beta).unwrap();
        let kg = riesz_convolve(&g, beta).unwrap();
        let a = f.inner(&kg);
        let b = g.inner(&kf);
        prop_assert!(rel(a, b) < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn field_dump_round_trip_is_bit_exact(
        u in grid_strategy().prop_flat_map(|g| {
            prop::collection::vec((any::<f64>(), any::<f64>()), g.len()).prop_map(move |v| (g, v))
        }).prop_filter_map("finite", |(g, v)| {
            let values: Vec<Complex<f64>> = v.into_iter().map(|(a, b)| Complex::new(a, b)).collect();
            values.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then(|| Field::new(g, values).unwrap())
        }),
        alpha in 0.01f64..=1.0,
        count in 1usize..=2,
    ) {
        let dump = FieldDump::new(alpha, vec![u; count]).unwrap();
        let mut bytes = Vec::new();
        dump.write_to(&mut bytes).unwrap();
        prop_assert_eq!(bytes.len(), dump.encoded_len());
        let back = FieldDump::read_from(&bytes[..]).unwrap();
        prop_assert_eq!(back.alpha.to_bits(), alpha.to_bits());
        prop_assert_eq!(back.grid(), dump.grid());
        for (a, b) in back.components.iter().zip(&dump.components) {
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
                prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn table_round_trip_is_bit_exact(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 3), 0..20)) {
        let mut t = Table::new(&["a", "b", "c"]);
        for r in &rows {
            t.push(r.clone()).unwrap();
        }
        let mut bytes = Vec::new();
        t.write_to(&mut bytes).unwrap();
        let back = Table::read_from(&bytes[..]).unwrap();
        prop_assert_eq!(back.rows().len(), rows.len());
        for (a, b) in back.rows().iter().zip(&rows) {
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn rearrangement_preserves_multiset_and_is_idempotent(u in any_field()) {
        let star = rearrange_decreasing(&u);
        let mut before = u.moduli();
        let mut after = star.moduli();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        prop_assert_eq!(&before, &after);
        let twice = rearrange_decreasing(&star);
        for (x, y) in twice.values().iter().zip(star.values()) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn concentration_function_is_monotone_up_to_total_mass(u in any_field(), k in 2usize..12) {
        let g = *u.grid();
        let r_max = g.length() * (g.dim() as f64).sqrt() / 2.0;
        let radii: Vec<f64> = (1..=k).map(|i| r_max * i as f64 / k as f64).collect();
        let m = concentration_function(&u, &radii).unwrap();
        for w in m.windows(2) {
            prop_assert!(w[1].1 >= w[0].1);
        }
        prop_assert!(rel(m.last().unwrap().1, u.mass()) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_is_phase_invariant(seed in any::<u64>(), theta in -10.0f64..10.0, m in model_strategy(2)) {
        let u = smooth(2, 32, 16.0, seed, 1.0);
        let mut v = u.clone();
        v.rotate_phase(theta);
        let a = energy_scalar(&u, &m).unwrap().total;
        let b = energy_scalar(&v, &m).unwrap().total;
        prop_assert!(rel(a, b) < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn periodic_energy_is_translation_invariant(
        seed in any::<u64>(),
        shift in prop::collection::vec(-16isize..16, 2),
        m in model_strategy(2),
    ) {
        let u = smooth(2, 32, 16.0, seed, 1.0);
        let f = Functional::scalar(&m, *u.grid(), ConvolutionMode::Periodic).unwrap();
        let a = f.energy(&u).unwrap().total;
        let b = f.energy(&u.shifted(&shift)).unwrap().total;
        prop_assert!(rel(a, b) < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn free_space_energy_is_nearly_translation_invariant(
        shift in prop::collection::vec(-4isize..=4, 2),
        width in 0.6f64..1.2,
        m in model_strategy(2),
    ) {
        let g = GridSpec::new(2, 64, 24.0).unwrap();
        let mut u = Field::from_fn(g, |x| Complex::new((-(x[0] * x[0] + x[1] * x[1]) / (width * width)).exp(), 0.0)).unwrap();
        u.normalize_to(1.0).unwrap();
        let a = energy_scalar(&u, &m).unwrap().total;
        let b = energy_scalar(&u.shifted(&shift), &m).unwrap().total;
        prop_assert!(rel(a, b) < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn single_term_general_matches_scalar_bitwise(seed in any::<u64>(), m in model_strategy(2)) {
        let u = smooth(2, 32, 16.0, seed, 1.0);
        let a = energy_scalar(&u, &m).unwrap();
        let b = energy_general(&u, &m.to_general()).unwrap();
        prop_assert_eq!(a.total.to_bits(), b.total.to_bits());
    }

    #[test]
    fn coulomb_form_is_symmetric_and_nonnegative(
        s1 in any::<u64>(),
        s2 in any::<u64>(),
        r in 1.0f64..3.0,
        beta_frac in 0.1f64..0.9,
    ) {
        let f = smooth(2, 32, 16.0, s1, 1.0);
        let g = smooth(2, 32, 16.0, s2, 1.0);
        let k = KernelSpec::Riesz { beta: 2.0 * beta_frac };
        let fg = coulomb_energy(&f, &g, r, &k).unwrap();
        let gf = coulomb_energy(&g, &f, r, &k).unwrap();
        prop_assert!(rel(fg, gf) < 1e-10);
        prop_assert!(coulomb_energy(&f, &f, r, &k).unwrap() >= 0.0);
    }

    #[test]
    fn propagation_conserves_mass_every_step(
        seed in any::<u64>(),
        dt in 1e-4f64..0.05,
        m in model_strategy(2),
    ) {
        let u = smooth(2, 32, 16.0, seed, 1.0);
        let mut p = ScalarPropagator::new(&u, &m, &PropagatorConfig::default()).unwrap();
        let mut prev = p.masses()[0];
        for _ in 0..10 {
            p.step(dt).unwrap();
            let now = p.masses()[0];
            prop_assert!(rel(now, prev) < 1e-12);
            prev = now;
        }
    }

    #[test]
    fn modulated_distance_ignores_gauge(
        seed in any::<u64>(),
        shift in prop::collection::vec(-8isize..8, 2),
        theta in -4.0f64..4.0,
        alpha in 0.2f64..=1.0,
    ) {
        let u = smooth(2, 32, 16.0, seed, 1.0);
        let mut v = u.shifted(&shift);
        v.rotate_phase(theta);
        let d = modulated_distance(&v, &u, alpha).unwrap();
        prop_assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn unit_dilation_is_the_identity(seed in 0u64..1000, m in model_strategy(2)) {
        let g = GridSpec::new(2, 64, 32.0).unwrap();
        let mut f = random_smooth_field(g, seed, 0);
        f.normalize_to(m.sigma).unwrap();
        let d = dilate(&f, 1.0);
        prop_assert!(d.difference(&f).norm() < 1e-10 * f.norm());
        let p = scaling_curve(&f, &m, &[1.0]).unwrap()[0];
        let e = energy_scalar(&f, &m).unwrap().total;
        prop_assert!(rel(p.energy, e) < 1e-10, "{} vs {e}", p.energy);
    }
}
