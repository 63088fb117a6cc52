use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fft::FftNd;
use super::field::Field;
use super::grid::{GridSpec, MAX_DIM};
use super::zeta::epstein_zeta;
use crate::error::{data, param, Result};
use crate::scalar::Real;

/// Boundary treatment of nonlocal convolutions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMode {
    /// Zero-padded doubled grid, no periodic images.
    #[default]
    FreeSpace,
    /// Circular convolution on the box with the minimum-image kernel.
    Periodic,
}

/// Discrete convolution `h^N Σ_j K(x_i − x_j) f_j` with a kernel truncated
/// at `|x| ≤ L/2`.
pub struct Convolver<T: Real> {
    grid: GridSpec<T>,
    mode: ConvolutionMode,
    fft: FftNd<T>,
    kernel_hat: Vec<T>,
    kernel_sum: T,
}

/// Whether a lattice offset lies inside the truncation ball `|d| h ≤ L/2`.
pub fn within_truncation(offset: &[i64], points: usize) -> bool {
    let half = points as i64 / 2;
    offset.iter().map(|d| d * d).sum::<i64>() <= half * half
}

/// Lattice weight of the Riesz kernel `|x|^{β−N}`.
///
/// Off the origin this is the point value. The origin carries the lattice
/// zeta correction `−Z_N(N−β) h^{β−N}`, which makes the lattice sum
/// reproduce the integral of the singular kernel to `O(h^2)` for smooth
/// densities.
pub fn riesz_lattice_weight<T: Real>(offset: &[i64], grid: &GridSpec<T>, beta: T) -> T {
    let n = grid.dim();
    let h = grid.spacing();
    let expo = beta - T::from_usize_lossy(n);
    let r2: i64 = offset.iter().map(|d| d * d).sum();
    if r2 == 0 {
        let z = epstein_zeta(n, (-expo).as_f64());
        -T::lit(z) * h.powf(expo)
    } else {
        (h * T::lit(r2 as f64).sqrt()).powf(expo)
    }
}

pub(crate) fn check_beta<T: Real>(beta: T, dim: usize) -> Result<()> {
    if beta > T::zero() && beta < T::from_usize_lossy(dim) {
        Ok(())
    } else {
        Err(param(format!("beta must lie in (0, {dim}), got {beta}")))
    }
}

impl<T: Real> Convolver<T> {
    /// Builds the operator from lattice weights `K(d)` for integer offsets.
    /// Offsets outside the truncation ball are never queried.
    pub fn from_weights(
        grid: GridSpec<T>,
        mode: ConvolutionMode,
        mut weight: impl FnMut(&[i64]) -> T,
    ) -> Result<Self> {
        let work = match mode {
            ConvolutionMode::FreeSpace => grid.doubled(),
            ConvolutionMode::Periodic => grid,
        };
        let dim = grid.dim();
        let mut table = vec![Complex::new(T::zero(), T::zero()); work.len()];
        let mut kernel_sum = T::zero();
        for (flat, slot) in table.iter_mut().enumerate() {
            let idx = work.unravel(flat);
            let mut offset = [0i64; MAX_DIM];
            for axis in 0..dim {
                offset[axis] = work.signed_index(idx[axis]);
            }
            let offset = &offset[..dim];
            if !within_truncation(offset, grid.points()) {
                continue;
            }
            let w = weight(offset);
            if !w.is_finite() {
                return Err(crate::error::Error::Kernel(format!(
                    "non-finite kernel weight at offset {offset:?}"
                )));
            }
            kernel_sum = kernel_sum + w;
            *slot = Complex::new(w, T::zero());
        }
        let fft = FftNd::new(dim, work.points());
        fft.forward(&mut table);
        Ok(Self {
            grid,
            mode,
            fft,
            kernel_hat: table.into_iter().map(|z| z.re).collect(),
            kernel_sum: kernel_sum * grid.cell_volume(),
        })
    }

    /// Riesz potential operator with kernel `|x|^{β−N}`.
    pub fn riesz(grid: GridSpec<T>, beta: T, mode: ConvolutionMode) -> Result<Self> {
        check_beta(beta, grid.dim())?;
        Self::from_weights(grid, mode, |d| riesz_lattice_weight(d, &grid, beta))
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn mode(&self) -> ConvolutionMode {
        self.mode
    }

    /// `h^N Σ_d K(d)`: the discrete kernel integral. In periodic mode this is
    /// the eigenvalue of the operator on constants.
    pub fn kernel_integral(&self) -> T {
        self.kernel_sum
    }

    /// Convolves a non-negative density given cell by cell.
    pub fn apply(&self, density: &[T]) -> Result<Vec<T>> {
        self.check_density(density)?;
        Ok(self.apply_unchecked(density))
    }

    /// Convolves two densities with one complex transform.
    pub fn apply_pair(&self, a: &[T], b: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        self.check_density(a)?;
        self.check_density(b)?;
        Ok(self.apply_pair_unchecked(a, b))
    }

    pub(crate) fn apply_unchecked(&self, density: &[T]) -> Vec<T> {
        let packed = self.run(density.iter().map(|&v| Complex::new(v, T::zero())));
        clamp_roundoff(packed.into_iter().map(|z| z.re).collect())
    }

    pub(crate) fn apply_pair_unchecked(&self, a: &[T], b: &[T]) -> (Vec<T>, Vec<T>) {
        let packed = self.run(a.iter().zip(b).map(|(&x, &y)| Complex::new(x, y)));
        let re = packed.iter().map(|z| z.re).collect();
        let im = packed.iter().map(|z| z.im).collect();
        (clamp_roundoff(re), clamp_roundoff(im))
    }

    /// Field-valued wrapper: the real parts of `density` are convolved.
    pub fn apply_field(&self, density: &Field<T>) -> Result<Field<T>> {
        self.grid.ensure_same(density.grid())?;
        let re: Vec<T> = density.values().iter().map(|z| z.re).collect();
        let out = self.apply(&re)?;
        Field::from_real(self.grid, &out)
    }

    fn check_density(&self, density: &[T]) -> Result<()> {
        if density.len() != self.grid.len() {
            return Err(data(format!(
                "density has {} cells, grid has {}",
                density.len(),
                self.grid.len()
            )));
        }
        if density.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(data("density must be finite and non-negative"));
        }
        Ok(())
    }

    fn run(&self, values: impl Iterator<Item = Complex<T>>) -> Vec<Complex<T>> {
        let g = self.grid;
        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = match self.mode {
            ConvolutionMode::Periodic => values.collect::<Vec<_>>(),
            ConvolutionMode::FreeSpace => {
                let work = g.doubled();
                let mut buf = vec![zero; work.len()];
                for (flat, v) in values.enumerate() {
                    buf[work.ravel(&g.unravel(flat))] = v;
                }
                buf
            }
        };
        self.fft.forward(&mut buf);
        for (z, &k) in buf.iter_mut().zip(&self.kernel_hat) {
            *z = *z * k;
        }
        self.fft.inverse(&mut buf);
        let hn = g.cell_volume();
        match self.mode {
            ConvolutionMode::Periodic => buf.into_iter().map(|z| z * hn).collect(),
            ConvolutionMode::FreeSpace => {
                let work = g.doubled();
                (0..g.len())
                    .map(|flat| buf[work.ravel(&g.unravel(flat))] * hn)
                    .collect()
            }
        }
    }
}

fn clamp_roundoff<T: Real>(mut out: Vec<T>) -> Vec<T> {
    let tol = crate::scalar::max_of(out.iter().map(|v| v.abs())) * T::lit(1e-14);
    for v in &mut out {
        if *v < T::zero() && -*v <= tol {
            *v = T::zero();
        }
    }
    out
}

/// Free-space Riesz potential `(|x|^{β−N} 1_{|x|≤L/2}) ⋆ f` of a
/// non-negative density stored in the real parts of `density`.
pub fn riesz_convolve<T: Real>(density: &Field<T>, beta: T) -> Result<Field<T>> {
    Convolver::riesz(*density.grid(), beta, ConvolutionMode::FreeSpace)?.apply_field(density)
}
