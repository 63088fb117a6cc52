use crate::error::{param, Error, Result};
use crate::scalar::Real;

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Periodic box `[-L/2, L/2)^N` sampled by `M` points per axis.
///
/// Cell centres sit at `x_i = -L/2 + i h` with `h = L/M`, so index `M/2` is
/// the origin. Flat indices are row-major with the last axis fastest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    dim: usize,
    points: usize,
    length: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(dim: usize, points: usize, length: T) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(param(format!("grid dimension must be 1, 2 or 3, got {dim}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(param(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        if !(length.is_finite() && length > T::zero()) {
            return Err(param(format!("box length must be positive, got {length}")));
        }
        Ok(Self { dim, points, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_usize_lossy(self.points)
    }

    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.dim as i32)
    }

    /// Number of cells, `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Total box volume `L^N`.
    pub fn volume(&self) -> T {
        self.length.powi(self.dim as i32)
    }

    /// Multi-index of a flat index; unused trailing axes are zero.
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0, |acc, &i| acc * self.points + (i % self.points))
    }

    /// Coordinate of cell index `i` along one axis.
    pub fn coordinate(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.spacing() - self.length * T::lit(0.5)
    }

    /// Cell-centre position of a flat index (trailing entries zero).
    pub fn position(&self, flat: usize) -> [T; MAX_DIM] {
        let idx = self.unravel(flat);
        let mut x = [T::zero(); MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(idx[axis]);
        }
        x
    }

    /// Signed lattice offset of index `i` in FFT order: `0..M/2-1, -M/2..-1`.
    pub fn signed_index(&self, i: usize) -> i64 {
        let m = self.points as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// Wavenumber `2 pi m / L` of FFT index `i`.
    pub fn wavenumber(&self, i: usize) -> T {
        T::lit(2.0) * T::PI() * T::lit(self.signed_index(i) as f64) / self.length
    }

    /// Index of the origin along each axis.
    pub fn center_index(&self) -> usize {
        self.points / 2
    }

    /// Grid with the same spacing and twice the points per axis.
    pub fn doubled(&self) -> Self {
        Self {
            dim: self.dim,
            points: 2 * self.points,
            length: self.length + self.length,
        }
    }

    pub fn ensure_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "({}, {}, {}) vs ({}, {}, {})",
                self.dim, self.points, self.length, other.dim, other.points, other.length
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridSpec::new(0, 16, 1.0).is_err());
        assert!(GridSpec::new(4, 16, 1.0).is_err());
        assert!(GridSpec::new(2, 12, 1.0).is_err());
        assert!(GridSpec::new(2, 4, 1.0).is_err());
        assert!(GridSpec::new(2, 16, 0.0).is_err());
        assert!(GridSpec::new(2, 16, f64::NAN).is_err());
    }

    #[test]
    fn derived_quantities() {
        let g = GridSpec::<f64>::new(2, 16, 8.0).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.spacing() * 16.0, g.length());
        assert_eq!(g.cell_volume(), 0.25);
        assert_eq!(g.len(), 256);
        assert_eq!(g.coordinate(0), -4.0);
        assert_eq!(g.coordinate(g.center_index()), 0.0);
    }

    #[test]
    fn ravel_unravel_roundtrip() {
        let g = GridSpec::<f64>::new(3, 8, 1.0).unwrap();
        for flat in [0, 1, 7, 8, 63, 64, 511] {
            assert_eq!(g.ravel(&g.unravel(flat)), flat);
        }
        assert_eq!(g.unravel(9), [0, 1, 1]);
    }

    #[test]
    fn wavenumber_lattice() {
        let g = GridSpec::new(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        let ks: Vec<f64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }
}
