use std::fmt;

use serde::Serialize;

use super::kernel::{unit_ball_volume, KernelSpec};
use super::params::{hartree_upper, CoupledModel, GeneralModel, ScalarModel};
use crate::scalar::Real;

/// One failed admissibility condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    /// The inequality or hypothesis that fails, e.g. `p < (N+2α+β)/N`.
    pub condition: String,
    pub detail: String,
    /// Sample point exhibiting the failure, `(θ, r)` for the scaling scan.
    pub witness: Option<(f64, f64)>,
}

/// Outcome of a validation pass. Validation never errors; it lists every
/// violated condition so all of them can be reported at once.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Whether a violation whose condition contains `needle` was recorded.
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.condition.contains(needle))
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    /// Appends a violation without a witness.
    pub fn fail(&mut self, condition: impl Into<String>, detail: impl Into<String>) {
        self.violations.push(Violation {
            condition: condition.into(),
            detail: detail.into(),
            witness: None,
        });
    }

    fn require(&mut self, holds: bool, condition: &str, detail: impl FnOnce() -> String) {
        if !holds {
            self.fail(condition, detail());
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "violated: {} ({})", v.condition, v.detail)?;
        }
        Ok(())
    }
}

fn finite<T: Real>(xs: &[T]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

fn check_common<T: Real>(report: &mut ValidationReport, dim: usize, alpha: T) -> bool {
    report.require((1..=3).contains(&dim), "N in {1, 2, 3}", || format!("N = {dim}"));
    report.require(alpha > T::zero() && alpha <= T::one(), "0 < α ≤ 1", || {
        format!("α = {alpha}")
    });
    (1..=3).contains(&dim)
}

fn check_power_window<T: Real>(
    report: &mut ValidationReport,
    name: &str,
    s: T,
    dim: usize,
    alpha: T,
) {
    let upper = T::lit(2.0) + T::lit(4.0) * alpha / T::from_usize_lossy(dim);
    report.require(s > T::lit(2.0), &format!("{name} > 2"), || format!("{name} = {s}"));
    report.require(s < upper, &format!("{name} < 2 + 4α/N"), || {
        format!("{name} = {s}, bound = {upper}")
    });
}

fn check_hartree_window<T: Real>(
    report: &mut ValidationReport,
    name: &str,
    p: T,
    upper: T,
    bound_text: &str,
) {
    report.require(p >= T::lit(2.0), &format!("2 ≤ {name}"), || format!("{name} = {p}"));
    report.require(p < upper, &format!("{name} < {bound_text}"), || {
        format!("{name} = {p}, bound = {upper}")
    });
}

/// Checks the admissibility window of a scalar model. Exponent windows apply
/// to terms with a non-zero coefficient.
pub fn validate_scalar<T: Real>(m: &ScalarModel<T>) -> ValidationReport {
    let mut r = ValidationReport::default();
    if !finite(&[m.alpha, m.beta, m.a, m.lambda, m.s, m.p, m.sigma]) {
        r.fail("finite parameters", "a parameter is NaN or infinite");
        return r;
    }
    let dim_ok = check_common(&mut r, m.dim, m.alpha);
    if dim_ok {
        let n = T::from_usize_lossy(m.dim);
        r.require(m.beta > T::zero() && m.beta < n, "0 < β < N", || {
            format!("β = {}, N = {}", m.beta, m.dim)
        });
    }
    r.require(m.a >= T::zero(), "a ≥ 0", || format!("a = {}", m.a));
    r.require(m.lambda >= T::zero(), "λ ≥ 0", || format!("λ = {}", m.lambda));
    r.require(m.a + m.lambda > T::zero(), "a + λ > 0", || {
        format!("a = {}, λ = {}", m.a, m.lambda)
    });
    if dim_ok && m.a > T::zero() {
        check_power_window(&mut r, "s", m.s, m.dim, m.alpha);
    }
    if dim_ok && m.lambda > T::zero() {
        let upper = hartree_upper(m.dim, m.alpha, m.beta);
        check_hartree_window(&mut r, "p", m.p, upper, "(N+2α+β)/N");
    }
    r.require(m.sigma > T::zero(), "σ > 0", || format!("σ = {}", m.sigma));
    r
}

/// Checks a multi-term model. Each Hartree exponent is bounded through the
/// weak index of its own kernel.
pub fn validate_general<T: Real>(m: &GeneralModel<T>) -> ValidationReport {
    let mut r = ValidationReport::default();
    if !finite(&[m.alpha, m.sigma]) {
        r.fail("finite parameters", "α or σ is NaN or infinite");
        return r;
    }
    let dim_ok = check_common(&mut r, m.dim, m.alpha);
    r.require(
        !(m.power_terms.is_empty() && m.hartree_terms.is_empty()),
        "at least one nonlinear term",
        || "both term lists are empty".into(),
    );
    let mut any_active = false;
    for (j, t) in m.power_terms.iter().enumerate() {
        let name = format!("s_{}", j + 1);
        if !finite(&[t.a, t.s]) {
            r.fail("finite parameters", format!("power term {}", j + 1));
            continue;
        }
        r.require(t.a >= T::zero(), &format!("a_{} ≥ 0", j + 1), || format!("a = {}", t.a));
        if t.a > T::zero() {
            any_active = true;
            if dim_ok {
                check_power_window(&mut r, &name, t.s, m.dim, m.alpha);
            }
        }
    }
    for (k, t) in m.hartree_terms.iter().enumerate() {
        let name = format!("p_{}", k + 1);
        if !finite(&[t.lambda, t.p]) {
            r.fail("finite parameters", format!("Hartree term {}", k + 1));
            continue;
        }
        r.require(t.lambda >= T::zero(), &format!("λ_{} ≥ 0", k + 1), || {
            format!("λ = {}", t.lambda)
        });
        if !dim_ok {
            continue;
        }
        if let Err(e) = t.kernel.check_well_formed(m.dim) {
            r.fail(format!("kernel {} well formed", k + 1), e.to_string());
            continue;
        }
        if t.lambda > T::zero() {
            any_active = true;
            let upper = t.kernel.p_upper(m.dim, m.alpha);
            check_hartree_window(&mut r, &name, t.p, upper, "(2r(α+N)−N)/(Nr)");
        }
    }
    r.require(any_active, "some coefficient > 0", || "all coefficients vanish".into());
    r.require(m.sigma > T::zero(), "σ > 0", || format!("σ = {}", m.sigma));
    r
}

/// Checks a coupled model: positive couplings and masses, and every exponent
/// in `[2, (N+2α+β)/N)`.
pub fn validate_coupled<T: Real>(m: &CoupledModel<T>) -> ValidationReport {
    let mut r = ValidationReport::default();
    let all = [
        m.alpha, m.beta, m.lambda1, m.lambda2, m.c, m.p1, m.p2, m.q, m.sigma1, m.sigma2,
    ];
    if !finite(&all) {
        r.fail("finite parameters", "a parameter is NaN or infinite");
        return r;
    }
    let dim_ok = check_common(&mut r, m.dim, m.alpha);
    if dim_ok {
        let n = T::from_usize_lossy(m.dim);
        r.require(m.beta > T::zero() && m.beta < n, "0 < β < N", || {
            format!("β = {}, N = {}", m.beta, m.dim)
        });
        let upper = hartree_upper(m.dim, m.alpha, m.beta);
        for (name, p) in [("p1", m.p1), ("p2", m.p2), ("q", m.q)] {
            check_hartree_window(&mut r, name, p, upper, "(N+2α+β)/N");
        }
    }
    for (name, v) in [("λ1", m.lambda1), ("λ2", m.lambda2), ("c", m.c), ("σ1", m.sigma1), ("σ2", m.sigma2)] {
        r.require(v > T::zero(), &format!("{name} > 0"), || format!("{name} = {v}"));
    }
    r
}

const THETA_STEPS: usize = 90;
const RIESZ_SAMPLES: usize = 61;
const SCAN_TOL: f64 = 1e-9;

/// Checks the kernel hypotheses against the Hartree exponents of `model`.
///
/// * H1: samples non-increasing, not identically zero, and a bounded weak
///   `L^r` estimate `sup_M M |{K > M}|^{1/r}` over the sampled levels. The
///   estimate is declared unbounded when its value at the outermost sample
///   exceeds twice its supremum over the inner half of the samples.
/// * H2: `K(θ r) ≥ θ^{−Γ} K(r)` for `θ ∈ {1.1, 1.2, …, 10}` and every sample
///   radius with `θ r` inside the table. The worst `(θ, r)` is the witness.
/// * H3: `Γ < 2α + N(2 − p_k)` for every active Hartree term using this
///   kernel, or every active term when none uses it.
pub fn validate_kernel<T: Real>(kernel: &KernelSpec<T>, model: &GeneralModel<T>) -> ValidationReport {
    let mut r = ValidationReport::default();
    let dim = model.dim;
    if !(1..=3).contains(&dim) {
        r.fail("N in {1, 2, 3}", format!("N = {dim}"));
        return r;
    }
    if let Err(e) = kernel.check_well_formed(dim) {
        r.fail("kernel well formed", e.to_string());
        return r;
    }
    let weak = kernel.weak_index(dim).as_f64();
    let gamma = kernel.homogeneity(dim).as_f64();
    r.require(gamma > 0.0 && weak >= 1.0, "Γ > 0 and r ≥ 1", || {
        format!("Γ = {gamma}, r = {weak}")
    });

    let (radii, values): (Vec<f64>, Vec<f64>) = match kernel {
        KernelSpec::Riesz { .. } => (0..RIESZ_SAMPLES)
            .map(|i| {
                let rad = 10f64.powf(-3.0 + 6.0 * i as f64 / (RIESZ_SAMPLES - 1) as f64);
                (rad, kernel.eval(T::lit(rad), dim).as_f64())
            })
            .unzip(),
        KernelSpec::Tabulated(t) => (
            t.radii().into_iter().map(|x| x.as_f64()).collect(),
            t.values.iter().map(|x| x.as_f64()).collect(),
        ),
    };
    let eval = |rad: f64| kernel.eval(T::lit(rad), dim).as_f64();
    let r_end = *radii.last().expect("non-empty table");

    // H1
    let peak = values.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        r.fail("H1", "kernel vanishes identically");
    } else if let Some(i) = (1..values.len()).find(|&i| values[i] > values[i - 1] * (1.0 + SCAN_TOL)) {
        r.fail("H1", format!("kernel increases between r = {} and r = {}", radii[i - 1], radii[i]));
    } else if weak >= 1.0 {
        let omega: f64 = unit_ball_volume::<f64>(dim);
        let level: Vec<f64> = radii
            .iter()
            .zip(&values)
            .map(|(&rad, &v)| v * (omega * rad.powi(dim as i32)).powf(1.0 / weak))
            .collect();
        let inner = level[..level.len().div_ceil(2)].iter().cloned().fold(0.0, f64::max);
        let last = *level.last().unwrap();
        if last > 2.0 * inner {
            r.fail(
                "H1",
                format!("weak L^{weak} estimate grows with the radius ({inner:.3e} to {last:.3e})"),
            );
        }
    }

    // H2
    let mut worst: Option<(f64, f64, f64)> = None;
    for step in 1..=THETA_STEPS {
        let theta = 1.0 + 0.1 * step as f64;
        let bound = theta.powf(-gamma);
        for (&rad, &v) in radii.iter().zip(&values) {
            if theta * rad > r_end || v <= 0.0 {
                continue;
            }
            let ratio = eval(theta * rad) / (bound * v);
            if ratio < 1.0 - SCAN_TOL && worst.is_none_or(|w| ratio < w.2) {
                worst = Some((theta, rad, ratio));
            }
        }
    }
    if let Some((theta, rad, ratio)) = worst {
        r.violations.push(Violation {
            condition: "H2".into(),
            detail: format!("K(θr) = {ratio:.3e}·θ^(−Γ)K(r) at θ = {theta:.1}, r = {rad:.4e}"),
            witness: Some((theta, rad)),
        });
    }

    // H3
    let alpha = model.alpha.as_f64();
    let active: Vec<_> = model.hartree_terms.iter().filter(|t| t.lambda > T::zero()).collect();
    let own: Vec<_> = active.iter().filter(|t| &t.kernel == kernel).collect();
    let exps: Vec<f64> = if own.is_empty() {
        active.iter().map(|t| t.p.as_f64()).collect()
    } else {
        own.iter().map(|t| t.p.as_f64()).collect()
    };
    let n = dim as f64;
    for p in exps {
        // Γ < 2α + N(2 − p), solved for p so boundary cases compare exactly
        let p_max = (2.0 * alpha + 2.0 * n - gamma) / n;
        r.require(p < p_max, "H3", || {
            format!("Γ = {gamma} is not below 2α + N(2 − p) for p = {p} (needs p < {p_max})")
        });
    }
    r
}
