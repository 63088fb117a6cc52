use num_complex::Complex;

use super::fft::FftNd;
use super::field::Field;
use super::grid::GridSpec;
use crate::error::{param, Result};
use crate::scalar::Real;

/// Fourier-multiplier operators on one grid.
///
/// The plan caches `|k|²`; multiplier tables such as `|k|^{2α}` are built by
/// [`SpectralPlan::symbol`] and can be reused by callers that apply the same
/// operator many times.
pub struct SpectralPlan<T: Real> {
    grid: GridSpec<T>,
    fft: FftNd<T>,
    k2: Vec<T>,
}

pub(crate) fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(param(format!("alpha must lie in (0, 1], got {alpha}")))
    }
}

impl<T: Real> SpectralPlan<T> {
    pub fn new(grid: GridSpec<T>) -> Self {
        let mut k2 = vec![T::zero(); grid.len()];
        for (flat, slot) in k2.iter_mut().enumerate() {
            let idx = grid.unravel(flat);
            *slot = idx[..grid.dim()]
                .iter()
                .map(|&i| grid.wavenumber(i).powi(2))
                .sum();
        }
        Self {
            fft: FftNd::new(grid.dim(), grid.points()),
            grid,
            k2,
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// `|k|²` in FFT order.
    pub fn wavenumber_sq(&self) -> &[T] {
        &self.k2
    }

    /// Unnormalized forward transform of the field values.
    pub fn forward(&self, u: &Field<T>) -> Vec<Complex<T>> {
        let mut buf = u.values().to_vec();
        self.fft.forward(&mut buf);
        buf
    }

    /// Inverse of [`SpectralPlan::forward`].
    pub fn inverse(&self, mut spectrum: Vec<Complex<T>>) -> Field<T> {
        self.fft.inverse(&mut spectrum);
        Field::from_raw(self.grid, spectrum)
    }

    /// `|k|^{2α}` in FFT order.
    pub fn symbol(&self, alpha: T) -> Result<Vec<T>> {
        check_alpha(alpha)?;
        Ok(self
            .k2
            .iter()
            .map(|&k2| if k2 > T::zero() { k2.powf(alpha) } else { T::zero() })
            .collect())
    }

    /// Applies a real multiplier given in FFT order.
    pub fn apply_multiplier(&self, u: &Field<T>, multiplier: &[T]) -> Field<T> {
        let mut spec = self.forward(u);
        for (z, &m) in spec.iter_mut().zip(multiplier) {
            *z = *z * m;
        }
        self.inverse(spec)
    }

    /// `h^N / M^N · Σ_k m(k) |û(k)|²` for a precomputed spectrum.
    pub fn spectral_quadratic(&self, spectrum: &[Complex<T>], multiplier: &[T]) -> T {
        let weight = self.grid.cell_volume() / T::from_usize_lossy(self.grid.len());
        weight
            * spectrum
                .iter()
                .zip(multiplier)
                .map(|(z, &m)| m * z.norm_sqr())
                .sum::<T>()
    }

    /// `(−Δ)^α u`.
    pub fn apply_fractional_laplacian(&self, u: &Field<T>, alpha: T) -> Result<Field<T>> {
        self.check_input(u)?;
        let sym = self.symbol(alpha)?;
        Ok(self.apply_multiplier(u, &sym))
    }

    /// `‖(−Δ)^{α/2} u‖²`.
    pub fn gagliardo_seminorm_sq(&self, u: &Field<T>, alpha: T) -> Result<T> {
        self.check_input(u)?;
        let sym = self.symbol(alpha)?;
        Ok(self.spectral_quadratic(&self.forward(u), &sym))
    }

    /// `‖u‖²_{H^α}` with multiplier `1 + |k|^{2α}`.
    pub fn h_alpha_norm_sq(&self, u: &Field<T>, alpha: T) -> Result<T> {
        self.check_input(u)?;
        let sym: Vec<T> = self.symbol(alpha)?.into_iter().map(|m| m + T::one()).collect();
        Ok(self.spectral_quadratic(&self.forward(u), &sym))
    }

    /// Solves `((−Δ)^α + τ) w = f`.
    pub fn bessel_apply(&self, f: &Field<T>, tau: T, alpha: T) -> Result<Field<T>> {
        if !(tau > T::zero() && tau.is_finite()) {
            return Err(param(format!("tau must be positive, got {tau}")));
        }
        self.check_input(f)?;
        let inv: Vec<T> = self
            .symbol(alpha)?
            .into_iter()
            .map(|m| T::one() / (m + tau))
            .collect();
        Ok(self.apply_multiplier(f, &inv))
    }

    fn check_input(&self, u: &Field<T>) -> Result<()> {
        self.grid.ensure_same(u.grid())?;
        u.ensure_finite()
    }
}
