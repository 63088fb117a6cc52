//! Epstein zeta function of the integer lattice.

use statrs::function::gamma::{gamma, gamma_ur};

const SHELL: i64 = 6;

/// Analytically continued `Z_N(s) = Σ_{j ∈ Z^N \ 0} |j|^{-s}`, valid for
/// `0 < s < N`.
///
/// Evaluated with the theta-function splitting at unit scale, which converges
/// like `exp(-π|j|²)`; the lattice is summed over `|j|_∞ ≤ 6`.
pub fn epstein_zeta(dim: usize, s: f64) -> f64 {
    let n = dim as f64;
    debug_assert!(s > 0.0 && s < n);
    let max_r2 = (dim as i64) * SHELL * SHELL;
    let mut counts = vec![0u64; max_r2 as usize + 1];
    let side = 2 * SHELL + 1;
    for flat in 0..side.pow(dim as u32) {
        let mut rest = flat;
        let mut r2 = 0;
        for _ in 0..dim {
            let j = rest % side - SHELL;
            rest /= side;
            r2 += j * j;
        }
        counts[r2 as usize] += 1;
    }
    let a = s / 2.0;
    let b = (n - s) / 2.0;
    let (ga, gb) = (gamma(a), gamma(b));
    let mut acc = 0.0;
    for (r2, &count) in counts.iter().enumerate().skip(1) {
        if count == 0 {
            continue;
        }
        let x = std::f64::consts::PI * r2 as f64;
        let term = gamma_ur(a, x) * ga * x.powf(-a) + gamma_ur(b, x) * gb * x.powf(-b);
        acc += count as f64 * term;
    }
    std::f64::consts::PI.powf(a) / ga * (acc - 1.0 / a - 1.0 / b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_is_twice_riemann_zeta() {
        // zeta(1/2), zeta(1/4) to 16 digits
        let cases = [(0.5, -1.4603545088095868), (0.25, -0.81327840526189165)];
        for (s, z) in cases {
            assert!((epstein_zeta(1, s) - 2.0 * z).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn square_lattice_reference() {
        // 4 zeta(s/2) beta(s/2) at s = 1/2
        assert!((epstein_zeta(2, 0.5) + 1.9216892211799304).abs() < 1e-12);
    }

    #[test]
    fn cubic_lattice_reference() {
        assert!((epstein_zeta(3, 1.0) + 2.8372974794806).abs() < 1e-10);
        assert!((epstein_zeta(3, 2.0) + 8.91363291758).abs() < 1e-9);
    }
}
