use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_spectral::{
    check_beta, riesz_lattice_weight, ConvolutionMode, Convolver, GridSpec,
};
use crate::scalar::Real;

/// Radial convolution potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec<T> {
    /// `|x|^{β−N}`.
    Riesz { beta: T },
    /// Samples on a log-spaced radius grid.
    Tabulated(TabulatedKernel<T>),
}

/// `K(r_i)` at `r_i = r_min (r_max/r_min)^{i/(n−1)}`, with the weak-Lebesgue
/// index `r` and homogeneity exponent `Γ` the kernel is claimed to satisfy.
///
/// Between samples `K` is linear in `log r`; below `r_min` it is held at the
/// first sample and beyond `r_max` it is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedKernel<T> {
    pub r_min: T,
    pub r_max: T,
    pub values: Vec<T>,
    pub weak_index: T,
    pub gamma: T,
}

const CELL_AVERAGE_INTERVALS: usize = 2048;

impl<T: Real> TabulatedKernel<T> {
    /// Samples `f` at `n` log-spaced radii.
    pub fn from_fn(
        r_min: T,
        r_max: T,
        n: usize,
        weak_index: T,
        gamma: T,
        f: impl Fn(T) -> T,
    ) -> Self {
        let mut k = Self { r_min, r_max, values: vec![T::zero(); n], weak_index, gamma };
        let radii: Vec<T> = (0..n).map(|i| k.radius(i)).collect();
        k.values = radii.into_iter().map(f).collect();
        k
    }

    pub fn radius(&self, i: usize) -> T {
        let n = self.values.len();
        if n < 2 {
            return self.r_min;
        }
        let t = T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
        self.r_min * (self.r_max / self.r_min).powf(t)
    }

    pub fn radii(&self) -> Vec<T> {
        (0..self.values.len()).map(|i| self.radius(i)).collect()
    }

    pub fn eval(&self, r: T) -> T {
        let n = self.values.len();
        if r > self.r_max {
            return T::zero();
        }
        if r <= self.r_min {
            return self.values[0];
        }
        let pos = (r / self.r_min).ln() / (self.r_max / self.r_min).ln()
            * T::from_usize_lossy(n - 1);
        let i = pos.floor().to_usize().unwrap_or(0).min(n - 2);
        let frac = pos - T::from_usize_lossy(i);
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }

    /// Mean of `K` over the ball with the volume of one grid cell.
    pub fn cell_average(&self, dim: usize, h: T) -> T {
        let rho = h * (T::one() / unit_ball_volume::<T>(dim)).powf(T::one() / T::from_usize_lossy(dim));
        // substitute t = (r/ρ)^N so the radial weight becomes dt on [0, 1]
        let n = CELL_AVERAGE_INTERVALS;
        let inv_n = T::one() / T::from_usize_lossy(dim);
        let f = |t: T| self.eval(rho * t.powf(inv_n));
        let dt = T::one() / T::from_usize_lossy(n);
        let mut acc = f(T::zero()) + f(T::one());
        for i in 1..n {
            let w = if i % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
            acc = acc + w * f(T::from_usize_lossy(i) * dt);
        }
        acc * dt / T::lit(3.0)
    }

    fn check_well_formed(&self) -> Result<()> {
        if self.values.len() < 2 {
            return Err(Error::Kernel("tabulated kernel needs at least two samples".into()));
        }
        if !(self.r_min > T::zero() && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(Error::Kernel(format!(
                "radius range must satisfy 0 < r_min < r_max, got [{}, {}]",
                self.r_min, self.r_max
            )));
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::Kernel("kernel samples must be finite and non-negative".into()));
        }
        Ok(())
    }
}

pub(crate) fn unit_ball_volume<T: Real>(dim: usize) -> T {
    match dim {
        1 => T::lit(2.0),
        2 => T::PI(),
        _ => T::lit(4.0) / T::lit(3.0) * T::PI(),
    }
}

impl<T: Real> KernelSpec<T> {
    pub fn check_well_formed(&self, dim: usize) -> Result<()> {
        match self {
            Self::Riesz { beta } => check_beta(*beta, dim).map_err(|e| Error::Kernel(e.to_string())),
            Self::Tabulated(t) => t.check_well_formed(),
        }
    }

    /// Radial profile `K(r)` for `r > 0`.
    pub fn eval(&self, r: T, dim: usize) -> T {
        match self {
            Self::Riesz { beta } => r.powf(*beta - T::from_usize_lossy(dim)),
            Self::Tabulated(t) => t.eval(r),
        }
    }

    /// Weak-Lebesgue index `r` with `K ∈ L^r_w`.
    pub fn weak_index(&self, dim: usize) -> T {
        match self {
            Self::Riesz { beta } => {
                let n = T::from_usize_lossy(dim);
                n / (n - *beta)
            }
            Self::Tabulated(t) => t.weak_index,
        }
    }

    /// Homogeneity exponent `Γ`.
    pub fn homogeneity(&self, dim: usize) -> T {
        match self {
            Self::Riesz { beta } => T::from_usize_lossy(dim) - *beta,
            Self::Tabulated(t) => t.gamma,
        }
    }

    /// Exclusive upper bound `(2r(α+N) − N)/(Nr)` on Hartree exponents.
    pub fn p_upper(&self, dim: usize, alpha: T) -> T {
        let n = T::from_usize_lossy(dim);
        let r = self.weak_index(dim);
        (T::lit(2.0) * r * (alpha + n) - n) / (n * r)
    }

    /// Convolution weight at an integer lattice offset.
    pub fn lattice_weight(&self, offset: &[i64], grid: &GridSpec<T>) -> T {
        match self {
            Self::Riesz { beta } => riesz_lattice_weight(offset, grid, *beta),
            Self::Tabulated(t) => {
                let r2: i64 = offset.iter().map(|d| d * d).sum();
                if r2 == 0 {
                    t.cell_average(grid.dim(), grid.spacing())
                } else {
                    t.eval(grid.spacing() * T::lit(r2 as f64).sqrt())
                }
            }
        }
    }

    pub fn convolver(&self, grid: GridSpec<T>, mode: ConvolutionMode) -> Result<Convolver<T>> {
        self.check_well_formed(grid.dim())?;
        match self {
            Self::Riesz { beta } => Convolver::riesz(grid, *beta, mode),
            Self::Tabulated(_) => {
                Convolver::from_weights(grid, mode, |d| self.lattice_weight(d, &grid))
            }
        }
    }
}

/// Free-space convolution of a non-negative density with `kernel`.
pub fn kernel_convolve<T: Real>(
    density: &crate::grid_spectral::Field<T>,
    kernel: &KernelSpec<T>,
) -> Result<crate::grid_spectral::Field<T>> {
    kernel
        .convolver(*density.grid(), ConvolutionMode::FreeSpace)?
        .apply_field(density)
}
