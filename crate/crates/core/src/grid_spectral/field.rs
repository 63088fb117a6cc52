use num_complex::Complex;

use super::grid::{GridSpec, MAX_DIM};
use crate::error::{data, Result};
use crate::scalar::Real;

/// Complex wave function sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: GridSpec<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> Field<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(data(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(data(format!("non-finite field value at cell {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Builds a field without checking finiteness. Length must match.
    pub(crate) fn from_raw(grid: GridSpec<T>, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self::from_raw(grid, vec![Complex::new(T::zero(), T::zero()); grid.len()])
    }

    /// Samples `f` at every cell centre. The slice holds `dim` coordinates.
    pub fn from_fn(grid: GridSpec<T>, mut f: impl FnMut(&[T]) -> Complex<T>) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                f(&x[..grid.dim()])
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn from_real(grid: GridSpec<T>, values: &[T]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(data("field contains non-finite values"))
        }
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        self.grid.ensure_same(&other.grid)
    }

    /// `‖u‖²_{L²} = h^N Σ |u|²`.
    pub fn mass(&self) -> T {
        self.grid.cell_volume() * self.values.iter().map(|z| z.norm_sqr()).sum::<T>()
    }

    pub fn norm(&self) -> T {
        self.mass().sqrt()
    }

    /// Real L² inner product `Re h^N Σ conj(u) v`.
    pub fn inner(&self, other: &Self) -> T {
        self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .sum::<T>()
    }

    /// `‖u‖^r_{L^r} = h^N Σ |u|^r`.
    pub fn lp_norm_pow(&self, r: T) -> T {
        self.grid.cell_volume() * self.values.iter().map(|z| z.norm().powf(r)).sum::<T>()
    }

    pub fn moduli(&self) -> Vec<T> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    /// Pointwise `|u|^r`.
    pub fn modulus_pow(&self, r: T) -> Vec<T> {
        self.values.iter().map(|z| z.norm().powf(r)).collect()
    }

    pub fn max_abs(&self) -> T {
        crate::scalar::max_of(self.values.iter().map(|z| z.norm()))
    }

    /// Flat index of the largest modulus (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        let mut best_val = T::neg_infinity();
        for (i, z) in self.values.iter().enumerate() {
            let m = z.norm_sqr();
            if m > best_val {
                best = i;
                best_val = m;
            }
        }
        best
    }

    pub fn scale(&mut self, c: T) {
        for z in &mut self.values {
            *z = *z * c;
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// Multiplies by the unit phase `e^{i theta}`.
    pub fn rotate_phase(&mut self, theta: T) {
        let w = Complex::from_polar(T::one(), theta);
        for z in &mut self.values {
            *z = *z * w;
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: T, other: &Self) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a = *a + *b * c;
        }
    }

    /// `self - other`, grids assumed equal.
    pub fn difference(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| *a - *b).collect();
        Self::from_raw(self.grid, values)
    }

    /// Rescales onto the sphere `‖u‖² = sigma`.
    pub fn normalize_to(&mut self, sigma: T) -> Result<()> {
        let m = self.mass();
        if !(m > T::zero()) {
            return Err(data("cannot normalize a zero field"));
        }
        self.scale((sigma / m).sqrt());
        Ok(())
    }

    /// Lattice translate `v(x) = u(x + shift·h)` on the periodic box.
    pub fn shifted(&self, shift: &[isize]) -> Self {
        let g = self.grid;
        let m = g.points() as isize;
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = g.unravel(flat);
            let mut src = [0usize; MAX_DIM];
            for axis in 0..g.dim() {
                let s = shift.get(axis).copied().unwrap_or(0);
                src[axis] = (idx[axis] as isize + s).rem_euclid(m) as usize;
            }
            *slot = self.values[g.ravel(&src)];
        }
        Self::from_raw(g, out)
    }
}

/// Two-component wave function on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldPair<T> {
    pub first: Field<T>,
    pub second: Field<T>,
}

impl<T: Real> FieldPair<T> {
    pub fn new(first: Field<T>, second: Field<T>) -> Result<Self> {
        first.ensure_same_grid(&second)?;
        Ok(Self { first, second })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.first.grid()
    }

    pub fn masses(&self) -> (T, T) {
        (self.first.mass(), self.second.mass())
    }

    pub fn as_array(&self) -> [&Field<T>; 2] {
        [&self.first, &self.second]
    }
}
