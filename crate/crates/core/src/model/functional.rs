use serde::Serialize;

use super::kernel::KernelSpec;
use super::params::{CoupledModel, GeneralModel, PowerTerm, ScalarModel};
use crate::error::{data, param, Result};
use crate::grid_spectral::{ConvolutionMode, Convolver, Field, FieldPair, GridSpec, SpectralPlan};
use crate::scalar::Real;

/// Energy split into its kinetic, local and nonlocal parts:
/// `total = kinetic − power − hartree`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyParts<T> {
    /// `½ ‖(−Δ)^{α/2} u‖²`.
    pub kinetic: T,
    /// `Σ_j (a_j/s_j) ‖u‖^{s_j}_{s_j}`.
    pub power: T,
    /// `Σ_k (λ_k/2p_k) D_{p_k}(u)`.
    pub hartree: T,
    pub total: T,
}

/// Everything one pass over a field produces.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    pub energy: EnergyParts<T>,
    pub seminorm_sq: T,
    pub mass: T,
    /// `Σ_j a_j ‖u‖^{s_j}_{s_j} + Σ_k λ_k D_{p_k}(u)`.
    pub nonlinear_work: T,
    pub gradient: Option<Field<T>>,
}

impl<T: Real> Evaluation<T> {
    /// Lagrange multiplier `(work − seminorm²)/‖u‖²`.
    pub fn omega(&self) -> T {
        (self.nonlinear_work - self.seminorm_sq) / self.mass
    }
}

struct HartreeOp<T: Real> {
    lambda: T,
    p: T,
    conv: Convolver<T>,
}

/// Energy functional with any number of power and Hartree terms, bound to a
/// grid. Terms with a zero coefficient are dropped at construction.
pub struct Functional<T: Real> {
    grid: GridSpec<T>,
    alpha: T,
    plan: SpectralPlan<T>,
    symbol: Vec<T>,
    power: Vec<PowerTerm<T>>,
    hartree: Vec<HartreeOp<T>>,
}

fn check_grid_dim<T: Real>(grid: &GridSpec<T>, dim: usize) -> Result<()> {
    if grid.dim() == dim {
        Ok(())
    } else {
        Err(param(format!("model dimension {dim} differs from grid dimension {}", grid.dim())))
    }
}

impl<T: Real> Functional<T> {
    pub fn scalar(m: &ScalarModel<T>, grid: GridSpec<T>, mode: ConvolutionMode) -> Result<Self> {
        m.check_structure()?;
        let g = m.to_general();
        Self::build(grid, m.dim, m.alpha, &g, mode)
    }

    pub fn general(m: &GeneralModel<T>, grid: GridSpec<T>, mode: ConvolutionMode) -> Result<Self> {
        m.check_structure()?;
        Self::build(grid, m.dim, m.alpha, m, mode)
    }

    fn build(
        grid: GridSpec<T>,
        dim: usize,
        alpha: T,
        m: &GeneralModel<T>,
        mode: ConvolutionMode,
    ) -> Result<Self> {
        check_grid_dim(&grid, dim)?;
        let plan = SpectralPlan::new(grid);
        let symbol = plan.symbol(alpha)?;
        let power = m.power_terms.iter().filter(|t| t.a > T::zero()).cloned().collect();
        let hartree = m
            .hartree_terms
            .iter()
            .filter(|t| t.lambda > T::zero())
            .map(|t| {
                Ok(HartreeOp { lambda: t.lambda, p: t.p, conv: t.kernel.convolver(grid, mode)? })
            })
            .collect::<Result<_>>()?;
        Ok(Self { grid, alpha, plan, symbol, power, hartree })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn plan(&self) -> &SpectralPlan<T> {
        &self.plan
    }

    /// `|k|^{2α}` in FFT order.
    pub fn symbol(&self) -> &[T] {
        &self.symbol
    }

    fn check_field(&self, u: &Field<T>) -> Result<()> {
        self.grid.ensure_same(u.grid())?;
        u.ensure_finite()
    }

    /// Energy, multiplier ingredients and optionally the L² gradient
    /// `(−Δ)^α u − Σ a_j|u|^{s_j−2}u − Σ λ_k (K_k⋆|u|^{p_k})|u|^{p_k−2}u`.
    /// The field must live on this functional's grid.
    pub fn evaluate(&self, u: &Field<T>, with_gradient: bool) -> Evaluation<T> {
        let hn = self.grid.cell_volume();
        let spectrum = self.plan.forward(u);
        let seminorm_sq = self.plan.spectral_quadratic(&spectrum, &self.symbol);
        let moduli = u.moduli();
        let mass = hn * moduli.iter().map(|&r| r * r).sum::<T>();
        let nl = self.nonlinear(&moduli);
        let kinetic = T::lit(0.5) * seminorm_sq;
        let energy = EnergyParts {
            kinetic,
            power: nl.power,
            hartree: nl.hartree,
            total: kinetic - nl.power - nl.hartree,
        };
        let gradient = with_gradient.then(|| {
            let mut lu = spectrum;
            for (z, &m) in lu.iter_mut().zip(&self.symbol) {
                *z = *z * m;
            }
            let mut g = self.plan.inverse(lu);
            for ((gz, uz), &c) in g.values_mut().iter_mut().zip(u.values()).zip(&nl.coefficient) {
                *gz = *gz - *uz * c;
            }
            g
        });
        Evaluation { energy, seminorm_sq, mass, nonlinear_work: nl.work, gradient }
    }

    /// Real potential `V` with `G(u) = (−Δ)^α u − V u`.
    pub fn nonlinear_potential(&self, moduli: &[T]) -> Vec<T> {
        self.nonlinear(moduli).coefficient
    }

    fn nonlinear(&self, moduli: &[T]) -> Nonlinear<T> {
        let hn = self.grid.cell_volume();
        let mut coefficient = vec![T::zero(); moduli.len()];
        let (mut power, mut hartree, mut work) = (T::zero(), T::zero(), T::zero());
        for t in &self.power {
            let em2 = t.s - T::lit(2.0);
            let mut sum = T::zero();
            for (c, &r) in coefficient.iter_mut().zip(moduli) {
                let rp = r.powf(em2);
                sum = sum + rp * r * r;
                *c = *c + t.a * rp;
            }
            let x = hn * sum;
            power = power + t.a / t.s * x;
            work = work + t.a * x;
        }
        for op in &self.hartree {
            let em2 = op.p - T::lit(2.0);
            let pow_m2: Vec<T> = moduli.iter().map(|&r| r.powf(em2)).collect();
            let rho: Vec<T> = pow_m2.iter().zip(moduli).map(|(&q, &r)| q * r * r).collect();
            let v = op.conv.apply_unchecked(&rho);
            let d = hn * rho.iter().zip(&v).map(|(&a, &b)| a * b).sum::<T>();
            for ((c, &vi), &q) in coefficient.iter_mut().zip(&v).zip(&pow_m2) {
                *c = *c + op.lambda * vi * q;
            }
            hartree = hartree + op.lambda / (T::lit(2.0) * op.p) * d;
            work = work + op.lambda * d;
        }
        Nonlinear { coefficient, power, hartree, work }
    }

    pub fn energy(&self, u: &Field<T>) -> Result<EnergyParts<T>> {
        self.check_field(u)?;
        Ok(self.evaluate(u, false).energy)
    }

    pub fn gradient(&self, u: &Field<T>) -> Result<Field<T>> {
        self.check_field(u)?;
        Ok(self.evaluate(u, true).gradient.expect("gradient requested"))
    }

    pub fn lagrange_multiplier(&self, u: &Field<T>) -> Result<T> {
        self.check_field(u)?;
        let ev = self.evaluate(u, false);
        if !(ev.mass > T::zero()) {
            return Err(data("Lagrange multiplier of a zero field"));
        }
        Ok(ev.omega())
    }

    /// `‖G(u) + ω u‖ / ‖u‖`, or the absolute norm when `u = 0`.
    pub fn residual(&self, u: &Field<T>, omega: T) -> Result<T> {
        self.check_field(u)?;
        let ev = self.evaluate(u, true);
        Ok(relative_residual(ev.gradient.as_ref().expect("gradient"), u, omega))
    }
}

fn relative_residual<T: Real>(gradient: &Field<T>, u: &Field<T>, omega: T) -> T {
    let mut r = gradient.clone();
    r.add_scaled(omega, u);
    let norm_u = u.norm();
    if norm_u > T::zero() {
        r.norm() / norm_u
    } else {
        r.norm()
    }
}

struct Nonlinear<T> {
    coefficient: Vec<T>,
    power: T,
    hartree: T,
    work: T,
}

/// Coupled energy split: `total = kinetic − self_interaction − cross`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoupledEnergyParts<T> {
    /// `½ (S_1 + S_2)`.
    pub kinetic: T,
    /// `μ_1 D_{p1}(u_1) + μ_2 D_{p2}(u_2)`.
    pub self_interaction: T,
    /// `(c/q) D_q(u_1, u_2)`.
    pub cross: T,
    pub total: T,
}

#[derive(Clone, Debug)]
pub struct CoupledEvaluation<T> {
    pub energy: CoupledEnergyParts<T>,
    pub seminorm_sq: [T; 2],
    pub mass: [T; 2],
    /// `D_{p1}(u_1)`, `D_{p2}(u_2)`, `D_q(u_1, u_2)`.
    pub coulomb: [T; 3],
    pub gradient: Option<[Field<T>; 2]>,
    lambda: [T; 2],
    c: T,
}

impl<T: Real> CoupledEvaluation<T> {
    /// `ω_j = (λ_j D_{pj}(u_j) + c D_q − S_j)/‖u_j‖²`.
    pub fn omegas(&self) -> [T; 2] {
        [0, 1].map(|j| {
            (self.lambda[j] * self.coulomb[j] + self.c * self.coulomb[2] - self.seminorm_sq[j])
                / self.mass[j]
        })
    }
}

/// Two-component energy bound to a grid.
pub struct CoupledFunctional<T: Real> {
    grid: GridSpec<T>,
    model: CoupledModel<T>,
    plan: SpectralPlan<T>,
    symbol: Vec<T>,
    conv: Convolver<T>,
}

impl<T: Real> CoupledFunctional<T> {
    pub fn new(m: &CoupledModel<T>, grid: GridSpec<T>, mode: ConvolutionMode) -> Result<Self> {
        m.check_structure()?;
        check_grid_dim(&grid, m.dim)?;
        let plan = SpectralPlan::new(grid);
        let symbol = plan.symbol(m.alpha)?;
        let conv = KernelSpec::Riesz { beta: m.beta }.convolver(grid, mode)?;
        Ok(Self { grid, model: m.clone(), plan, symbol, conv })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn model(&self) -> &CoupledModel<T> {
        &self.model
    }

    pub fn plan(&self) -> &SpectralPlan<T> {
        &self.plan
    }

    pub fn symbol(&self) -> &[T] {
        &self.symbol
    }

    fn check_pair(&self, u: &FieldPair<T>) -> Result<()> {
        self.grid.ensure_same(u.grid())?;
        u.first.ensure_finite()?;
        u.second.ensure_finite()
    }

    pub fn evaluate(&self, u: &FieldPair<T>, with_gradient: bool) -> CoupledEvaluation<T> {
        let m = &self.model;
        let hn = self.grid.cell_volume();
        let fields = u.as_array();
        let spectra = fields.map(|f| self.plan.forward(f));
        let seminorm_sq = [0, 1].map(|j| self.plan.spectral_quadratic(&spectra[j], &self.symbol));
        let moduli = fields.map(|f| f.moduli());
        let mass = [0, 1].map(|j| hn * moduli[j].iter().map(|&r| r * r).sum::<T>());
        let pot = self.potentials(&moduli[0], &moduli[1]);
        let kinetic = T::lit(0.5) * (seminorm_sq[0] + seminorm_sq[1]);
        let self_interaction = m.mu1() * pot.coulomb[0] + m.mu2() * pot.coulomb[1];
        let cross = m.mu_cross() * pot.coulomb[2];
        let energy = CoupledEnergyParts {
            kinetic,
            self_interaction,
            cross,
            total: kinetic - self_interaction - cross,
        };
        let gradient = with_gradient.then(|| {
            let [s0, s1] = spectra;
            let [c0, c1] = pot.coefficient;
            [(s0, c0, fields[0]), (s1, c1, fields[1])].map(|(mut spec, coef, f)| {
                for (z, &k) in spec.iter_mut().zip(&self.symbol) {
                    *z = *z * k;
                }
                let mut g = self.plan.inverse(spec);
                for ((gz, uz), &c) in g.values_mut().iter_mut().zip(f.values()).zip(&coef) {
                    *gz = *gz - *uz * c;
                }
                g
            })
        });
        CoupledEvaluation {
            energy,
            seminorm_sq,
            mass,
            coulomb: pot.coulomb,
            gradient,
            lambda: [m.lambda1, m.lambda2],
            c: m.c,
        }
    }

    /// Real potentials `V_j` with `G_j = (−Δ)^α u_j − V_j u_j`.
    pub fn nonlinear_potentials(&self, moduli1: &[T], moduli2: &[T]) -> [Vec<T>; 2] {
        self.potentials(moduli1, moduli2).coefficient
    }

    fn potentials(&self, m1: &[T], m2: &[T]) -> CoupledPotentials<T> {
        let m = &self.model;
        let hn = self.grid.cell_volume();
        let two = T::lit(2.0);
        let pw = |r: &[T], e: T| -> Vec<T> { r.iter().map(|&x| x.powf(e - two)).collect() };
        let dens = |q: &[T], r: &[T]| -> Vec<T> { q.iter().zip(r).map(|(&a, &b)| a * b * b).collect() };
        let (q11, q22, qc1, qc2) = (pw(m1, m.p1), pw(m2, m.p2), pw(m1, m.q), pw(m2, m.q));
        let (rho1, rho2) = (dens(&q11, m1), dens(&q22, m2));
        let (tau1, tau2) = (dens(&qc1, m1), dens(&qc2, m2));
        let (v1, v2) = self.conv.apply_pair_unchecked(&rho1, &rho2);
        let (w1, w2) = self.conv.apply_pair_unchecked(&tau1, &tau2);
        let dot = |a: &[T], b: &[T]| hn * a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
        let coulomb = [dot(&rho1, &v1), dot(&rho2, &v2), dot(&tau1, &w2)];
        let coef = |lam: T, v: &[T], q: &[T], w: &[T], qc: &[T]| -> Vec<T> {
            (0..v.len()).map(|i| lam * v[i] * q[i] + m.c * w[i] * qc[i]).collect()
        };
        CoupledPotentials {
            coefficient: [
                coef(m.lambda1, &v1, &q11, &w2, &qc1),
                coef(m.lambda2, &v2, &q22, &w1, &qc2),
            ],
            coulomb,
        }
    }

    pub fn energy(&self, u: &FieldPair<T>) -> Result<CoupledEnergyParts<T>> {
        self.check_pair(u)?;
        Ok(self.evaluate(u, false).energy)
    }

    pub fn gradient(&self, u: &FieldPair<T>) -> Result<FieldPair<T>> {
        self.check_pair(u)?;
        let [g1, g2] = self.evaluate(u, true).gradient.expect("gradient requested");
        Ok(FieldPair { first: g1, second: g2 })
    }

    pub fn multipliers(&self, u: &FieldPair<T>) -> Result<(T, T)> {
        self.check_pair(u)?;
        let ev = self.evaluate(u, false);
        if !(ev.mass[0] > T::zero() && ev.mass[1] > T::zero()) {
            return Err(data("Lagrange multiplier of a vanishing component"));
        }
        let [w1, w2] = ev.omegas();
        Ok((w1, w2))
    }

    /// Relative residuals `‖G_j + ω_j u_j‖/‖u_j‖`.
    pub fn residuals(&self, u: &FieldPair<T>, omegas: (T, T)) -> Result<(T, T)> {
        self.check_pair(u)?;
        let [g1, g2] = self.evaluate(u, true).gradient.expect("gradient");
        Ok((
            relative_residual(&g1, &u.first, omegas.0),
            relative_residual(&g2, &u.second, omegas.1),
        ))
    }
}

struct CoupledPotentials<T> {
    coefficient: [Vec<T>; 2],
    coulomb: [T; 3],
}

const FREE: ConvolutionMode = ConvolutionMode::FreeSpace;

pub fn energy_scalar<T: Real>(u: &Field<T>, m: &ScalarModel<T>) -> Result<EnergyParts<T>> {
    Functional::scalar(m, *u.grid(), FREE)?.energy(u)
}

pub fn energy_general<T: Real>(u: &Field<T>, m: &GeneralModel<T>) -> Result<EnergyParts<T>> {
    Functional::general(m, *u.grid(), FREE)?.energy(u)
}

pub fn energy_coupled<T: Real>(u: &FieldPair<T>, m: &CoupledModel<T>) -> Result<CoupledEnergyParts<T>> {
    CoupledFunctional::new(m, *u.grid(), FREE)?.energy(u)
}

pub fn gradient_scalar<T: Real>(u: &Field<T>, m: &ScalarModel<T>) -> Result<Field<T>> {
    Functional::scalar(m, *u.grid(), FREE)?.gradient(u)
}

pub fn gradient_general<T: Real>(u: &Field<T>, m: &GeneralModel<T>) -> Result<Field<T>> {
    Functional::general(m, *u.grid(), FREE)?.gradient(u)
}

pub fn gradient_coupled<T: Real>(u: &FieldPair<T>, m: &CoupledModel<T>) -> Result<FieldPair<T>> {
    CoupledFunctional::new(m, *u.grid(), FREE)?.gradient(u)
}

pub fn lagrange_multiplier<T: Real>(u: &Field<T>, m: &ScalarModel<T>) -> Result<T> {
    Functional::scalar(m, *u.grid(), FREE)?.lagrange_multiplier(u)
}

pub fn coupled_multipliers<T: Real>(u: &FieldPair<T>, m: &CoupledModel<T>) -> Result<(T, T)> {
    CoupledFunctional::new(m, *u.grid(), FREE)?.multipliers(u)
}

pub fn residual<T: Real>(u: &Field<T>, omega: T, m: &ScalarModel<T>) -> Result<T> {
    Functional::scalar(m, *u.grid(), FREE)?.residual(u, omega)
}

/// `D_r(f, g) = h^N Σ |f|^r (K ⋆ |g|^r)` with free-space convolution.
pub fn coulomb_energy<T: Real>(f: &Field<T>, g: &Field<T>, r_pow: T, kernel: &KernelSpec<T>) -> Result<T> {
    f.ensure_same_grid(g).map_err(|e| data(e.to_string()))?;
    f.ensure_finite()?;
    g.ensure_finite()?;
    let conv = kernel.convolver(*f.grid(), FREE)?;
    let fr = f.modulus_pow(r_pow);
    let v = conv.apply_unchecked(&g.modulus_pow(r_pow));
    Ok(f.grid().cell_volume() * fr.iter().zip(&v).map(|(&a, &b)| a * b).sum::<T>())
}
