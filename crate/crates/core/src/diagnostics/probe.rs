use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::error::{param, Result};
use crate::grid_spectral::{Convolver, ConvolutionMode, Field, GridSpec, SpectralPlan};
use crate::model::ScalarModel;
use crate::rng::{self, streams};
use crate::scalar::Real;

/// Empirical constants of the Gagliardo–Nirenberg and Hardy–Littlewood–
/// Sobolev inequalities over random smooth fields.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityProbe<T> {
    /// `‖u‖_s^s / (‖(−Δ)^{α/2}u‖^{λ's} ‖u‖_2^{(1−λ')s})`, `λ' = N(s−2)/(2αs)`.
    pub gn_ratios: Vec<T>,
    /// `𝔻_p(u) / ‖|u|^p‖²_{L^{2N/(N+β)}}`.
    pub hls_ratios: Vec<T>,
    pub gn_max: T,
    pub hls_max: T,
}

/// Both ratios for one field, using precomputed operators on its grid.
pub struct InequalityRatios<T: Real> {
    plan: SpectralPlan<T>,
    symbol: Vec<T>,
    conv: Convolver<T>,
    dim: T,
    alpha: T,
    beta: T,
    s: T,
    p: T,
}

impl<T: Real> InequalityRatios<T> {
    pub fn new(m: &ScalarModel<T>, grid: GridSpec<T>) -> Result<Self> {
        m.check_structure()?;
        let plan = SpectralPlan::new(grid);
        let symbol = plan.symbol(m.alpha)?;
        let conv = Convolver::riesz(grid, m.beta, ConvolutionMode::FreeSpace)?;
        Ok(Self { plan, symbol, conv, dim: T::from_usize_lossy(m.dim), alpha: m.alpha, beta: m.beta, s: m.s, p: m.p })
    }

    pub fn gn(&self, u: &Field<T>) -> T {
        let two = T::lit(2.0);
        let lam = self.dim * (self.s - two) / (two * self.alpha * self.s);
        let semi = self.plan.spectral_quadratic(&self.plan.forward(u), &self.symbol).sqrt();
        let l2 = u.norm();
        u.lp_norm_pow(self.s) / (semi.powf(lam * self.s) * l2.powf((T::one() - lam) * self.s))
    }

    pub fn hls(&self, u: &Field<T>) -> T {
        let rho = u.modulus_pow(self.p);
        let v = self.conv.apply_unchecked(&rho);
        let hn = u.grid().cell_volume();
        let d = hn * rho.iter().zip(&v).map(|(&a, &b)| a * b).sum::<T>();
        let t = T::lit(2.0) * self.dim / (self.dim + self.beta);
        let norm_t = hn * rho.iter().map(|&r| r.powf(t)).sum::<T>();
        d / norm_t.powf(T::lit(2.0) / t)
    }
}

/// Sum of one to three Gaussian bumps with random complex amplitudes,
/// centres within `L/8` of the origin and widths in `[L/24, L/8]`.
pub fn random_smooth_field<T: Real>(grid: GridSpec<T>, seed: u64, index: u64) -> Field<T> {
    let mut r = rng::stream(seed, streams::PROBE + index);
    let l = grid.length().as_f64();
    let count = r.random_range(1..=3usize);
    let bumps: Vec<([f64; 3], f64, Complex<f64>)> = (0..count)
        .map(|_| {
            let mut c = [0.0; 3];
            for x in c.iter_mut() {
                *x = r.random_range(-l / 8.0..l / 8.0);
            }
            let w = r.random_range(l / 24.0..l / 8.0);
            let amp = Complex::from_polar(r.random_range(0.5..1.5), r.random_range(0.0..std::f64::consts::TAU));
            (c, w, amp)
        })
        .collect();
    let mut u = Field::from_fn(grid, |x| {
        let v: Complex<f64> = bumps
            .iter()
            .map(|(c, w, a)| {
                let d2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi.as_f64() - ci).powi(2)).sum();
                a * (-d2 / (w * w)).exp()
            })
            .sum();
        Complex::new(T::lit(v.re), T::lit(v.im))
    })
    .expect("finite bumps");
    if u.mass() == T::zero() {
        u = Field::from_fn(grid, |_| Complex::new(T::one(), T::zero())).expect("constant");
    }
    u
}

/// Largest GN and HLS ratios over `samples` random smooth fields.
pub fn gn_hls_probe<T: Real>(samples: usize, m: &ScalarModel<T>, grid: GridSpec<T>, seed: u64) -> Result<InequalityProbe<T>> {
    if samples == 0 {
        return Err(param("at least one sample is required"));
    }
    let ratios = InequalityRatios::new(m, grid)?;
    let (mut gn_ratios, mut hls_ratios) = (Vec::with_capacity(samples), Vec::with_capacity(samples));
    for i in 0..samples {
        let u = random_smooth_field(grid, seed, i as u64);
        gn_ratios.push(ratios.gn(&u));
        hls_ratios.push(ratios.hls(&u));
    }
    let max = |v: &[T]| v.iter().fold(T::zero(), |a, &b| a.max(b));
    Ok(InequalityProbe { gn_max: max(&gn_ratios), hls_max: max(&hls_ratios), gn_ratios, hls_ratios })
}
