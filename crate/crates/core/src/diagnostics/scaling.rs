use num_complex::Complex;
use serde::Serialize;

use crate::error::{data, param, Result};
use crate::grid_spectral::{ConvolutionMode, Field, GridSpec, SpectralPlan};
use crate::model::{Functional, ScalarModel};
use crate::scalar::Real;

/// Relative level below which `|f|` counts as outside the support.
const SUPPORT_LEVEL: f64 = 1e-8;
/// Relative level below which a Fourier coefficient counts as unresolved.
const BAND_LEVEL: f64 = 1e-10;
const MASS_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingPoint<T> {
    pub theta: T,
    pub energy: T,
    pub seminorm_sq: T,
    /// `|‖f_θ‖² − ‖f‖²| / ‖f‖²` before renormalization.
    pub mass_defect: T,
}

/// Admissible `θ` interval for [`scaling_curve`]: the dilated support must
/// fit in the box and the compressed spectrum must stay below Nyquist.
pub fn scaling_range<T: Real>(f: &Field<T>) -> (T, T) {
    let g = f.grid();
    let n = T::from_usize_lossy(g.dim());
    let level = T::lit(SUPPORT_LEVEL) * f.max_abs();
    let mut extent = T::zero();
    for (flat, z) in f.values().iter().enumerate() {
        if z.norm() > level {
            let x: [T; 3] = g.position(flat);
            for &xd in &x[..g.dim()] {
                extent = extent.max(xd.abs());
            }
        }
    }
    let lo = (T::lit(2.0) * extent / g.length()).powf(n);

    let plan = SpectralPlan::new(*g);
    let spec = plan.forward(f);
    let peak = spec.iter().fold(T::zero(), |a, z| a.max(z.norm()));
    let mut band = T::zero();
    for (k, z) in spec.iter().enumerate() {
        if z.norm() > T::lit(BAND_LEVEL) * peak {
            let idx = g.unravel(k);
            for &i in &idx[..g.dim()] {
                band = band.max(g.wavenumber(i).abs());
            }
        }
    }
    let nyquist = T::PI() / g.spacing();
    let hi = if band > T::zero() { (nyquist / band).powf(n) } else { T::infinity() };
    (lo, hi)
}

/// Matrix of the 1-D trigonometric interpolant of `M` samples evaluated at
/// `c·x_i`. Points that leave the box get zero rows.
fn interpolation_matrix<T: Real>(g: &GridSpec<T>, c: T) -> Vec<Complex<T>> {
    let m = g.points();
    let half = T::lit(0.5) * g.length();
    let mf = T::from_usize_lossy(m);
    let mut out = vec![Complex::new(T::zero(), T::zero()); m * m];
    for i in 0..m {
        let y = c * g.coordinate(i);
        if y < -half || y >= half {
            continue;
        }
        for j in 0..m {
            let dx = y - g.coordinate(j);
            let mut acc = Complex::new(T::zero(), T::zero());
            for q in 0..m {
                let k = g.wavenumber(q);
                acc = acc
                    + if q == m / 2 {
                        Complex::new((k * dx).cos(), T::zero())
                    } else {
                        Complex::from_polar(T::one(), k * dx)
                    };
            }
            out[i * m + j] = acc / mf;
        }
    }
    out
}

/// `θ^{1/2} f(θ^{1/N} x)` through separable trigonometric interpolation.
pub fn dilate<T: Real>(f: &Field<T>, theta: T) -> Field<T> {
    let g = *f.grid();
    let m = g.points();
    let n = g.dim();
    let c = theta.powf(T::one() / T::from_usize_lossy(n));
    let mat = interpolation_matrix(&g, c);
    let mut vals = f.values().to_vec();
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let mut next = vec![Complex::new(T::zero(), T::zero()); vals.len()];
        for (flat, slot) in next.iter_mut().enumerate() {
            let i = (flat / stride) % m;
            let base = flat - i * stride;
            let row = &mat[i * m..(i + 1) * m];
            *slot = row.iter().enumerate().map(|(j, &w)| w * vals[base + j * stride]).sum();
        }
        vals = next;
    }
    let amp = theta.sqrt();
    for z in vals.iter_mut() {
        *z = *z * amp;
    }
    Field::from_raw(g, vals)
}

/// `J(f_θ)` for each `θ`, after checking the admissible range and mass
/// preservation of the resampling. Each `f_θ` is renormalized to `m.sigma`.
pub fn scaling_curve<T: Real>(f: &Field<T>, m: &ScalarModel<T>, thetas: &[T]) -> Result<Vec<ScalingPoint<T>>> {
    f.ensure_finite()?;
    if !(f.mass() > T::zero()) {
        return Err(data("scaling curve of a zero field"));
    }
    let (lo, hi) = scaling_range(f);
    for &t in thetas {
        if !(t > T::zero() && t >= lo && t <= hi) {
            return Err(param(format!("theta = {t} outside the admissible interval [{lo:.6e}, {hi:.6e}]")));
        }
    }
    let func = Functional::scalar(m, *f.grid(), ConvolutionMode::FreeSpace)?;
    let mass = f.mass();
    thetas
        .iter()
        .map(|&theta| {
            let mut ft = dilate(f, theta);
            let mass_defect = ((ft.mass() - mass) / mass).abs();
            if mass_defect > T::lit(MASS_TOLERANCE) {
                return Err(data(format!("resampling at theta = {theta} changed the mass by {mass_defect:.3e}")));
            }
            ft.normalize_to(m.sigma)?;
            let ev = func.evaluate(&ft, false);
            Ok(ScalingPoint { theta, energy: ev.energy.total, seminorm_sq: ev.seminorm_sq, mass_defect })
        })
        .collect()
}

/// Bisection for the sign change of `θ ↦ J(f_θ)` on `[lo, hi]`, which must
/// bracket it with `J(f_lo) < 0 < J(f_hi)`.
pub fn energy_crossing<T: Real>(f: &Field<T>, m: &ScalarModel<T>, lo: T, hi: T, tol: T) -> Result<T> {
    let energy = |t: T| -> Result<T> { Ok(scaling_curve(f, m, &[t])?[0].energy) };
    let (mut a, mut b) = (lo, hi);
    if !(energy(a)? < T::zero() && energy(b)? > T::zero()) {
        return Err(param("interval does not bracket a sign change of the energy"));
    }
    while b - a > tol * b {
        let mid = T::lit(0.5) * (a + b);
        if energy(mid)? < T::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(T::lit(0.5) * (a + b))
}
