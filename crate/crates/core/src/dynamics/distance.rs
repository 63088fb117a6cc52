use num_complex::Complex;

use crate::error::Result;
use crate::grid_spectral::{Field, FieldPair, GridSpec, SpectralPlan};
use crate::scalar::Real;

/// Closest point of a gauge orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct Modulation<T> {
    /// `‖e^{iθ_j} ψ_j(· + y) − ref_j‖_{H^α}` summed in quadrature over components.
    pub distance: T,
    /// Lattice translation `y / h`, each entry in `[−M/2, M/2)`.
    pub shift: Vec<isize>,
    /// Optimal phase per component.
    pub phase: Vec<T>,
}

/// H^α distance to a fixed reference modulo lattice translations and
/// per-component phases.
pub struct DistanceMeter<T: Real> {
    grid: GridSpec<T>,
    plan: SpectralPlan<T>,
    weight: Vec<T>,
    reference: Vec<Vec<Complex<T>>>,
}

impl<T: Real> DistanceMeter<T> {
    pub fn new(reference: &[&Field<T>], alpha: T) -> Result<Self> {
        let grid = *reference[0].grid();
        for r in reference {
            grid.ensure_same(r.grid())?;
            r.ensure_finite()?;
        }
        let plan = SpectralPlan::new(grid);
        let weight = plan.symbol(alpha)?.into_iter().map(|m| m + T::one()).collect();
        let reference = reference.iter().map(|r| plan.forward(r)).collect();
        Ok(Self { grid, plan, weight, reference })
    }

    pub fn measure(&self, psi: &[&Field<T>]) -> Result<Modulation<T>> {
        let spectra: Vec<Vec<Complex<T>>> = psi
            .iter()
            .map(|p| {
                self.grid.ensure_same(p.grid())?;
                p.ensure_finite()?;
                Ok(self.plan.forward(p))
            })
            .collect::<Result<_>>()?;
        let correlations: Vec<Field<T>> = spectra
            .iter()
            .zip(&self.reference)
            .map(|(a, b)| {
                let x = a
                    .iter()
                    .zip(b)
                    .zip(&self.weight)
                    .map(|((&p, &r), &w)| p * r.conj() * w)
                    .collect();
                self.plan.inverse(x)
            })
            .collect();
        let score = |flat: usize| correlations.iter().map(|c| c.values()[flat].norm()).sum::<T>();
        let best = (0..self.grid.len())
            .fold((0, T::neg_infinity()), |(bi, bv), i| {
                let v = score(i);
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            })
            .0;
        let m = self.grid.points();
        let idx = self.grid.unravel(best);
        let phase: Vec<T> = correlations.iter().map(|c| -c.values()[best].arg()).collect();

        let two_pi = T::lit(std::f64::consts::TAU);
        let mf = T::from_usize_lossy(m);
        let norm = self.grid.cell_volume() / T::from_usize_lossy(self.grid.len());
        let mut total = T::zero();
        for ((spec, r), &theta) in spectra.iter().zip(&self.reference).zip(&phase) {
            let mut sum = T::zero();
            for (k, ((&p, &rk), &w)) in spec.iter().zip(r).zip(&self.weight).enumerate() {
                let kk = self.grid.unravel(k);
                let turns = (0..self.grid.dim()).map(|d| kk[d] * idx[d]).sum::<usize>() % m;
                let angle = theta + two_pi * T::from_usize_lossy(turns) / mf;
                sum = sum + w * (p * Complex::from_polar(T::one(), angle) - rk).norm_sqr();
            }
            total = total + norm * sum;
        }
        let shift = (0..self.grid.dim())
            .map(|d| {
                let s = idx[d] as isize;
                if s >= (m / 2) as isize {
                    s - m as isize
                } else {
                    s
                }
            })
            .collect();
        Ok(Modulation { distance: total.sqrt(), shift, phase })
    }
}

/// `min_{y, θ} ‖e^{iθ} ψ(· + y) − ref‖_{H^α}` over lattice translations `y`.
pub fn modulated_distance<T: Real>(psi: &Field<T>, reference: &Field<T>, alpha: T) -> Result<T> {
    Ok(DistanceMeter::new(&[reference], alpha)?.measure(&[psi])?.distance)
}

/// Pair version with one common translation and independent phases.
pub fn modulated_distance_pair<T: Real>(psi: &FieldPair<T>, reference: &FieldPair<T>, alpha: T) -> Result<T> {
    let meter = DistanceMeter::new(&[&reference.first, &reference.second], alpha)?;
    Ok(meter.measure(&[&psi.first, &psi.second])?.distance)
}
