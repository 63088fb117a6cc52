use num_complex::Complex;

use crate::grid_spectral::{Field, GridSpec};
use crate::scalar::Real;

/// Cells ordered by squared lattice distance to the centre index, ties by
/// flat index.
pub fn cells_by_distance<T: Real>(grid: &GridSpec<T>) -> Vec<usize> {
    let c = grid.center_index() as i64;
    let mut order: Vec<(i64, usize)> = (0..grid.len())
        .map(|flat| {
            let idx = grid.unravel(flat);
            let d2 = idx[..grid.dim()].iter().map(|&i| (i as i64 - c).pow(2)).sum();
            (d2, flat)
        })
        .collect();
    order.sort_unstable();
    order.into_iter().map(|(_, flat)| flat).collect()
}

/// Discrete symmetric-decreasing rearrangement: the moduli sorted in
/// decreasing order and laid out from the centre outwards.
///
/// The output is real, non-negative and carries exactly the multiset of
/// `|u|` values.
pub fn rearrange_decreasing<T: Real>(u: &Field<T>) -> Field<T> {
    let mut moduli = u.moduli();
    moduli.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vec![Complex::new(T::zero(), T::zero()); u.len()];
    for (flat, v) in cells_by_distance(u.grid()).into_iter().zip(moduli) {
        out[flat] = Complex::new(v, T::zero());
    }
    Field::from_raw(*u.grid(), out)
}

/// `h^N Σ |u|^r` summed in increasing order, so any permutation of the
/// cells gives the same bits.
pub fn lr_norm_pow_sorted<T: Real>(u: &Field<T>, r: T) -> T {
    let mut terms: Vec<T> = u.values().iter().map(|z| z.norm().powf(r)).collect();
    terms.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    u.grid().cell_volume() * terms.into_iter().fold(T::zero(), |a, b| a + b)
}

/// Norms and Coulomb energies of `|u|` and `u*`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RearrangementCheck<T> {
    /// `(r, ‖|u|‖_r^r, ‖u*‖_r^r)` for `r ∈ {2, s}`.
    pub lr_norms: Vec<(T, T, T)>,
    pub coulomb_before: T,
    pub coulomb_after: T,
    /// Gagliardo seminorm² of `|u|` and of `u*`. The discrete rearrangement
    /// need not decrease it, so this is informational.
    pub seminorm_before: T,
    pub seminorm_after: T,
}

impl<T: Real> RearrangementCheck<T> {
    pub fn new(u: &Field<T>, m: &crate::model::ScalarModel<T>) -> crate::Result<Self> {
        u.ensure_finite()?;
        let star = rearrange_decreasing(u);
        let modulus = Field::from_raw(*u.grid(), u.moduli().into_iter().map(|r| Complex::new(r, T::zero())).collect());
        let kernel = crate::model::KernelSpec::Riesz { beta: m.beta };
        let coulomb = |f: &Field<T>| crate::model::coulomb_energy(f, f, m.p, &kernel);
        let plan = crate::grid_spectral::SpectralPlan::new(*u.grid());
        Ok(Self {
            lr_norms: [T::lit(2.0), m.s]
                .iter()
                .map(|&r| (r, lr_norm_pow_sorted(&modulus, r), lr_norm_pow_sorted(&star, r)))
                .collect(),
            coulomb_before: coulomb(&modulus)?,
            coulomb_after: coulomb(&star)?,
            seminorm_before: plan.gagliardo_seminorm_sq(&modulus, m.alpha)?,
            seminorm_after: plan.gagliardo_seminorm_sq(&star, m.alpha)?,
        })
    }
}
