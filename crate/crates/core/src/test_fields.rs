//! Deterministic smooth fields shared by unit tests.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::grid_spectral::{Field, GridSpec};
use crate::rng;

/// Sum of a few Gaussian bumps with random complex amplitudes, centres within
/// `L/6` of the origin and widths between `L/16` and `L/8`.
pub fn smooth_field(grid: GridSpec<f64>, seed: u64) -> Field<f64> {
    let mut r = rng::stream(seed, rng::streams::USER);
    let l = grid.length();
    let bumps: Vec<([f64; 3], f64, Complex<f64>)> = (0..3)
        .map(|_| {
            let mut c = [0.0; 3];
            for x in c.iter_mut() {
                *x = r.random_range(-l / 6.0..l / 6.0);
            }
            let w = r.random_range(l / 16.0..l / 8.0);
            let re: f64 = StandardNormal.sample(&mut r);
            let im: f64 = StandardNormal.sample(&mut r);
            (c, w, Complex::new(1.0 + re.abs(), 0.5 * im))
        })
        .collect();
    Field::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|(c, w, amp)| {
                let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                amp * (-d2 / (w * w)).exp()
            })
            .sum()
    })
    .unwrap()
}
