use crate::error::{param, Result};
use crate::grid_spectral::Field;
use crate::scalar::Real;

/// `M(R) = sup_y ∫_{B_R(y)} |u|²` over lattice centres `y`, with the exact
/// discrete ball (cell centres inside or on the sphere) and periodic wrap.
///
/// Ball sums are accumulated over offsets in order of increasing distance,
/// so `M` is non-decreasing in `R` exactly. Radii must lie in
/// `(0, L√N/2]`; the largest admissible ball covers the whole box.
pub fn concentration_function<T: Real>(u: &Field<T>, radii: &[T]) -> Result<Vec<(T, T)>> {
    u.ensure_finite()?;
    let g = *u.grid();
    let dim = g.dim();
    let m = g.points();
    let max_r = T::lit(0.5) * g.length() * T::from_usize_lossy(dim).sqrt();
    for &r in radii {
        if !(r > T::zero() && r <= max_r * (T::one() + T::lit(1e-12))) {
            return Err(param(format!("radius {r} outside (0, {max_r}]")));
        }
    }
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    let rho: Vec<T> = u.values().iter().map(|z| z.norm_sqr()).collect();

    // offsets in min-image form, ordered by integer squared length
    let mut offsets: Vec<(i64, [usize; 3])> = (0..g.len())
        .map(|flat| {
            let idx = g.unravel(flat);
            let d2 = (0..dim).map(|a| g.signed_index(idx[a]).pow(2)).sum::<i64>();
            (d2, idx)
        })
        .collect();
    offsets.sort_unstable_by_key(|&(d2, idx)| (d2, idx));

    let h = g.spacing();
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].partial_cmp(&radii[b]).expect("finite radii"));
    // number of offsets inside each ball, in the sorted radius order
    let counts: Vec<usize> = order
        .iter()
        .map(|&i| {
            // cells on the sphere count as inside despite the rounding of R/h
            let r2 = (radii[i] / h) * (radii[i] / h) * (T::one() + T::lit(1e-12));
            offsets.partition_point(|&(d2, _)| T::lit(d2 as f64) <= r2)
        })
        .collect();
    let needed = *counts.last().expect("nonempty");

    let mut best = vec![T::zero(); radii.len()];
    for centre in 0..g.len() {
        let c = g.unravel(centre);
        let mut sum = T::zero();
        let mut next = 0;
        for (n, (_, off)) in offsets[..needed].iter().enumerate() {
            while next < counts.len() && counts[next] == n {
                best[next] = best[next].max(sum);
                next += 1;
            }
            let mut flat = 0;
            for a in 0..dim {
                flat = flat * m + (c[a] + off[a]) % m;
            }
            sum = sum + rho[flat];
        }
        while next < counts.len() {
            best[next] = best[next].max(sum);
            next += 1;
        }
    }
    let hn = g.cell_volume();
    let mut out = vec![(T::zero(), T::zero()); radii.len()];
    for (k, &i) in order.iter().enumerate() {
        out[i] = (radii[i], hn * best[k]);
    }
    Ok(out)
}
