use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{param, Result};
use crate::grid_spectral::check_alpha;
use crate::scalar::Real;

/// Single power plus single Riesz–Hartree nonlinearity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarModel<T> {
    pub dim: usize,
    pub alpha: T,
    pub beta: T,
    pub a: T,
    pub lambda: T,
    pub s: T,
    pub p: T,
    /// Target `‖u‖²`.
    pub sigma: T,
}

/// `a |u|^{s-2} u` contribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm<T> {
    pub a: T,
    pub s: T,
}

/// `λ (K ⋆ |u|^p) |u|^{p-2} u` contribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HartreeTerm<T> {
    pub lambda: T,
    pub p: T,
    pub kernel: KernelSpec<T>,
}

/// Sums of power and Hartree terms with arbitrary radial kernels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralModel<T> {
    pub dim: usize,
    pub alpha: T,
    #[serde(default)]
    pub power_terms: Vec<PowerTerm<T>>,
    #[serde(default)]
    pub hartree_terms: Vec<HartreeTerm<T>>,
    pub sigma: T,
}

/// Two components coupled through a Riesz–Hartree cross term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledModel<T> {
    pub dim: usize,
    pub alpha: T,
    pub beta: T,
    pub lambda1: T,
    pub lambda2: T,
    pub c: T,
    pub p1: T,
    pub p2: T,
    pub q: T,
    pub sigma1: T,
    pub sigma2: T,
}

fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(param(format!("dimension must be 1, 2 or 3, got {dim}")))
    }
}

fn check_coefficient<T: Real>(name: &str, c: T, exponent: T) -> Result<()> {
    if !(c.is_finite() && c >= T::zero()) {
        return Err(param(format!("{name} must be finite and non-negative, got {c}")));
    }
    if c > T::zero() && !(exponent.is_finite() && exponent >= T::lit(2.0)) {
        return Err(param(format!(
            "exponent of an active {name} term must be at least 2, got {exponent}"
        )));
    }
    Ok(())
}

fn check_sigma<T: Real>(name: &str, sigma: T) -> Result<()> {
    if sigma.is_finite() && sigma > T::zero() {
        Ok(())
    } else {
        Err(param(format!("{name} must be positive, got {sigma}")))
    }
}

impl<T: Real> ScalarModel<T> {
    /// `a / s`.
    pub fn b(&self) -> T {
        self.a / self.s
    }

    /// `λ / 2p`.
    pub fn mu(&self) -> T {
        self.lambda / (T::lit(2.0) * self.p)
    }

    /// Exclusive upper bound `2 + 4α/N` for `s`.
    pub fn s_upper(&self) -> T {
        T::lit(2.0) + T::lit(4.0) * self.alpha / T::from_usize_lossy(self.dim)
    }

    /// Exclusive upper bound `(N + 2α + β)/N` for `p`.
    pub fn p_upper(&self) -> T {
        hartree_upper(self.dim, self.alpha, self.beta)
    }

    /// Same functional written as a [`GeneralModel`]. Terms with a zero
    /// coefficient are dropped.
    pub fn to_general(&self) -> GeneralModel<T> {
        let mut power_terms = Vec::new();
        if self.a > T::zero() {
            power_terms.push(PowerTerm { a: self.a, s: self.s });
        }
        let mut hartree_terms = Vec::new();
        if self.lambda > T::zero() {
            hartree_terms.push(HartreeTerm {
                lambda: self.lambda,
                p: self.p,
                kernel: KernelSpec::Riesz { beta: self.beta },
            });
        }
        GeneralModel {
            dim: self.dim,
            alpha: self.alpha,
            power_terms,
            hartree_terms,
            sigma: self.sigma,
        }
    }

    /// Copy with a different constraint level.
    pub fn with_sigma(&self, sigma: T) -> Self {
        Self { sigma, ..self.clone() }
    }

    /// Checks that the functional can be evaluated: finite parameters,
    /// admissible `α`, `β` and exponents of at least 2 on active terms.
    /// The variational windows are checked by [`super::validate_scalar`].
    pub fn check_structure(&self) -> Result<()> {
        check_dim(self.dim)?;
        check_alpha(self.alpha)?;
        check_coefficient("power", self.a, self.s)?;
        check_coefficient("Hartree", self.lambda, self.p)?;
        if self.lambda > T::zero() {
            crate::grid_spectral::check_beta(self.beta, self.dim)?;
        }
        check_sigma("sigma", self.sigma)
    }
}

pub(crate) fn hartree_upper<T: Real>(dim: usize, alpha: T, beta: T) -> T {
    let n = T::from_usize_lossy(dim);
    (n + T::lit(2.0) * alpha + beta) / n
}

impl<T: Real> GeneralModel<T> {
    pub fn check_structure(&self) -> Result<()> {
        check_dim(self.dim)?;
        check_alpha(self.alpha)?;
        if self.power_terms.is_empty() && self.hartree_terms.is_empty() {
            return Err(param("model has no nonlinear terms"));
        }
        for t in &self.power_terms {
            check_coefficient("power", t.a, t.s)?;
        }
        for t in &self.hartree_terms {
            check_coefficient("Hartree", t.lambda, t.p)?;
            t.kernel.check_well_formed(self.dim)?;
        }
        check_sigma("sigma", self.sigma)
    }

    pub fn with_sigma(&self, sigma: T) -> Self {
        Self { sigma, ..self.clone() }
    }
}

impl<T: Real> CoupledModel<T> {
    pub fn mu1(&self) -> T {
        self.lambda1 / (T::lit(2.0) * self.p1)
    }

    pub fn mu2(&self) -> T {
        self.lambda2 / (T::lit(2.0) * self.p2)
    }

    /// `c / q`.
    pub fn mu_cross(&self) -> T {
        self.c / self.q
    }

    pub fn p_upper(&self) -> T {
        hartree_upper(self.dim, self.alpha, self.beta)
    }

    /// Scalar model of component `j` (1 or 2) with the cross term removed.
    pub fn component(&self, j: usize) -> ScalarModel<T> {
        let (lambda, p, sigma) = if j == 1 {
            (self.lambda1, self.p1, self.sigma1)
        } else {
            (self.lambda2, self.p2, self.sigma2)
        };
        ScalarModel {
            dim: self.dim,
            alpha: self.alpha,
            beta: self.beta,
            a: T::zero(),
            lambda,
            s: T::lit(2.0) + T::lit(2.0) * self.alpha / T::from_usize_lossy(self.dim),
            p,
            sigma,
        }
    }

    pub fn check_structure(&self) -> Result<()> {
        check_dim(self.dim)?;
        check_alpha(self.alpha)?;
        crate::grid_spectral::check_beta(self.beta, self.dim)?;
        check_coefficient("lambda1", self.lambda1, self.p1)?;
        check_coefficient("lambda2", self.lambda2, self.p2)?;
        check_coefficient("coupling", self.c, self.q)?;
        check_sigma("sigma1", self.sigma1)?;
        check_sigma("sigma2", self.sigma2)
    }
}
