use num_complex::Complex;

use crate::grid_spectral::{Field, SpectralPlan};
use crate::scalar::Real;

const REFINEMENTS: usize = 4;

/// Circular-mean centroid of `|u|²` per axis, in physical units.
pub fn density_centroid<T: Real>(u: &Field<T>) -> Vec<T> {
    let g = u.grid();
    let two_pi = T::lit(std::f64::consts::TAU);
    let mut acc = vec![Complex::new(T::zero(), T::zero()); g.dim()];
    for (flat, z) in u.values().iter().enumerate() {
        let rho = z.norm_sqr();
        let x: [T; 3] = g.position(flat);
        for (a, &xd) in acc.iter_mut().zip(&x[..g.dim()]) {
            *a = *a + Complex::from_polar(rho, two_pi * xd / g.length());
        }
    }
    acc.iter().map(|a| a.arg() * g.length() / two_pi).collect()
}

/// Translates `u` by a continuous displacement, `v(x) = u(x + shift)`,
/// through the Fourier interpolant.
pub fn translate_spectral<T: Real>(u: &Field<T>, shift: &[T]) -> Field<T> {
    let g = *u.grid();
    let plan = SpectralPlan::new(g);
    let mut spec = plan.forward(u);
    for (k, z) in spec.iter_mut().enumerate() {
        let idx = g.unravel(k);
        for d in 0..g.dim() {
            let a = g.wavenumber(idx[d]) * shift[d];
            // the Nyquist mode has no sign, so it gets the real part only
            *z = if idx[d] == g.points() / 2 { *z * a.cos() } else { *z * Complex::from_polar(T::one(), a) };
        }
    }
    plan.inverse(spec)
}

/// Spectral translation that puts the density centroid on the box centre
/// to sub-cell accuracy.
pub fn recenter<T: Real>(u: &Field<T>) -> Field<T> {
    let mut v = u.clone();
    for _ in 0..REFINEMENTS {
        let c = density_centroid(&v);
        v = translate_spectral(&v, &c);
    }
    v
}
