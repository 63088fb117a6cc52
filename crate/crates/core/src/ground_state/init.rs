use num_complex::Complex;
use rand::Rng;

use crate::error::Result;
use crate::grid_spectral::{Field, GridSpec, MAX_DIM};
use crate::rng;
use crate::scalar::Real;

/// Centred Gaussian `exp(−|x|²/2w²)` with `w = L/8`, scaled to `‖u‖² = σ`.
pub fn gaussian_init<T: Real>(grid: GridSpec<T>, sigma: T) -> Result<Field<T>> {
    let w = grid.length() / T::lit(8.0);
    let two_w2 = T::lit(2.0) * w * w;
    let mut u = Field::from_fn(grid, |x| {
        let r2: T = x.iter().map(|&c| c * c).sum();
        Complex::new((-r2 / two_w2).exp(), T::zero())
    })?;
    u.normalize_to(sigma)?;
    Ok(u)
}

/// Start `index` of a multi-start family. Start 0 is [`gaussian_init`]; the
/// others are one to three positive Gaussian bumps with centres within
/// `L/8` of the origin and widths in `[L/16, L/8]`, drawn from the
/// multi-start stream of `seed`. The bumps are translated so their weighted
/// centre is the origin.
pub fn multistart_init<T: Real>(grid: GridSpec<T>, sigma: T, seed: u64, index: usize) -> Result<Field<T>> {
    if index == 0 {
        return gaussian_init(grid, sigma);
    }
    let mut r = rng::stream(seed, rng::streams::MULTISTART + index as u64);
    let l = grid.length().as_f64();
    let dim = grid.dim();
    let count = r.random_range(1..=3usize);
    let bumps: Vec<([f64; MAX_DIM], f64, f64)> = (0..count)
        .map(|_| {
            let mut c = [0.0; MAX_DIM];
            for x in c.iter_mut().take(dim) {
                *x = r.random_range(-l / 8.0..=l / 8.0);
            }
            let w = r.random_range(l / 16.0..=l / 8.0);
            let amp = r.random_range(0.5..=1.5);
            (c, w, amp)
        })
        .collect();
    let profile = |x: &[T], shift: &[f64; MAX_DIM]| -> f64 {
        bumps
            .iter()
            .map(|(c, w, amp)| {
                let d2: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(a, &xa)| (xa.as_f64() + shift[a] - c[a]).powi(2))
                    .sum();
                amp * (-d2 / (2.0 * w * w)).exp()
            })
            .sum()
    };
    // translate the whole profile so its density centroid is the origin
    let mut centroid = [0.0; MAX_DIM];
    let mut mass = 0.0;
    for flat in 0..grid.len() {
        let x = grid.position(flat);
        let rho = profile(&x[..dim], &[0.0; MAX_DIM]).powi(2);
        mass += rho;
        for a in 0..dim {
            centroid[a] += rho * x[a].as_f64();
        }
    }
    for c in centroid.iter_mut() {
        *c /= mass;
    }
    let mut u = Field::from_fn(grid, |x| Complex::new(T::lit(profile(x, &centroid)), T::zero()))?;
    u.normalize_to(sigma)?;
    Ok(u)
}

/// Lattice shift that moves the circular-mean centroid of `density` to the
/// centre index, for use with [`Field::shifted`].
pub fn centering_shift<T: Real>(grid: &GridSpec<T>, density: &[T]) -> [isize; MAX_DIM] {
    let m = grid.points();
    let mut shift = [0isize; MAX_DIM];
    for (axis, slot) in shift.iter_mut().enumerate().take(grid.dim()) {
        let (mut c, mut s) = (0.0f64, 0.0f64);
        for (flat, &rho) in density.iter().enumerate() {
            let i = grid.unravel(flat)[axis];
            let ang = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            c += rho.as_f64() * ang.cos();
            s += rho.as_f64() * ang.sin();
        }
        if c == 0.0 && s == 0.0 {
            continue;
        }
        let mean = s.atan2(c).rem_euclid(2.0 * std::f64::consts::PI) * m as f64
            / (2.0 * std::f64::consts::PI);
        let raw = (mean - (m / 2) as f64).round() as isize;
        *slot = raw.rem_euclid(m as isize);
        if *slot > m as isize / 2 {
            *slot -= m as isize;
        }
    }
    shift
}

/// Mass within the outer `max(1, M/16)` cells of any axis.
pub fn boundary_mass<T: Real>(u: &Field<T>) -> T {
    let g = u.grid();
    let m = g.points();
    let width = (m / 16).max(1);
    let mut acc = T::zero();
    for (flat, z) in u.values().iter().enumerate() {
        let idx = g.unravel(flat);
        if idx[..g.dim()].iter().any(|&i| i < width || i >= m - width) {
            acc = acc + z.norm_sqr();
        }
    }
    acc * g.cell_volume()
}
