//! The average-field-Pauli energy
//!
//! ```text
//! E[u] = ∫ |(−i∇ + βA[|u|²])u|² + γ|u|⁴ + V|u|²
//! ```
//!
//! its Euler–Lagrange operator, and the exact identities used to validate it.
//!
//! Negative `β` is handled through the conjugation symmetry
//! `E_{−β}[ū] = E_β[u]`: the field is conjugated, the computation runs at `|β|`,
//! and results are conjugated back. Both orientations therefore produce
//! identical numbers.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selfmag;
use crate::spectral::{DensityField, Field, Grid, Spectral};

/// `|∫|u|² − 1|` above which a report is flagged as not normalized.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Largest fraction of `∫|u|²` that [`dilate`] may push out of the box.
pub const DILATE_MASS_TOLERANCE: f64 = 1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// External potential `V`.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Zero,
    /// `V = |x|²`.
    Harmonic,
    Sampled(DensityField),
}

impl Potential {
    pub fn sample(&self, grid: &Grid) -> Result<DensityField> {
        let v = match self {
            Potential::Zero => DensityField::zeros(*grid),
            Potential::Harmonic => DensityField::from_fn(*grid, |x, y| x * x + y * y),
            Potential::Sampled(v) => {
                grid.check_same(v.grid())?;
                v.clone()
            }
        };
        if v.values().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("potential"));
        }
        Ok(v)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }

    /// Short label used in reports: `zero`, `harmonic` or `sampled`.
    pub fn label(&self) -> &'static str {
        match self {
            Potential::Zero => "zero",
            Potential::Harmonic => "harmonic",
            Potential::Sampled(_) => "sampled",
        }
    }
}

/// Couplings `(β, γ, V)` of the functional.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub beta: f64,
    pub gamma: f64,
    pub potential: Potential,
}

impl Coupling {
    pub fn new(beta: f64, gamma: f64, potential: Potential) -> Self {
        Self { beta, gamma, potential }
    }

    /// `E_{β,0,0}`, the magnetic kinetic energy alone.
    pub fn magnetic(beta: f64) -> Self {
        Self::new(beta, 0.0, Potential::Zero)
    }

    /// The self-dual coupling `γ = −2π|β|`, `V = 0`.
    pub fn self_dual(beta: f64) -> Self {
        Self::new(beta, -2.0 * PI * beta.abs(), Potential::Zero)
    }
}

/// The three energy terms without gradient information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    pub kinetic_magnetic: f64,
    /// `∫|u|⁴`.
    pub l4norm: f64,
    /// `γ∫|u|⁴`.
    pub quartic: f64,
    pub potential: f64,
    /// `∫|u|²`.
    pub norm: f64,
}

impl EnergyTerms {
    pub fn total(&self) -> f64 {
        self.kinetic_magnetic + self.quartic + self.potential
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kinetic_magnetic: f64,
    pub quartic: f64,
    pub potential: f64,
    pub total: f64,
    pub l4norm: f64,
    /// `kinetic_magnetic − 2π|β|·l4norm`, zero exactly on the nonlinear Landau level.
    pub bogomolnyi_defect: f64,
    /// `‖Hu − λu‖`.
    pub el_residual: f64,
    /// `λ = ⟨u, Hu⟩ / ⟨u, u⟩`.
    pub multiplier: f64,
    pub norm: f64,
    pub normalized: bool,
}

/// Intermediate quantities shared by the energy and its gradient, at `β ≥ 0`.
struct State {
    grid: Grid,
    beta: f64,
    conjugated: bool,
    u: Vec<Complex64>,
    rho: Vec<f64>,
    /// `βA[ρ]`, zero when `β = 0`.
    a: [Vec<f64>; 2],
    du: [Vec<Complex64>; 2],
    /// Covariant derivatives `(∂_j + iβA_j)u`.
    cov: [Vec<Complex64>; 2],
}

impl State {
    fn new(sp: &Spectral, u: &Field, beta: f64) -> Result<Self> {
        sp.grid().check_same(u.grid())?;
        if !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
        }
        let conjugated = beta < 0.0;
        let values: Vec<Complex64> =
            if conjugated { u.values().iter().map(|v| v.conj()).collect() } else { u.values().to_vec() };
        let beta = beta.abs();
        let rho: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
        let n2 = rho.len();
        let a = if beta == 0.0 {
            [vec![0.0; n2], vec![0.0; n2]]
        } else {
            let (ax, ay) = sp.grad_perp_log_raw(&rho);
            [ax.into_iter().map(|v| beta * v).collect(), ay.into_iter().map(|v| beta * v).collect()]
        };
        let du = sp.gradient_raw(&values);
        let cov = [0, 1].map(|j| {
            du[j].iter().zip(&a[j]).zip(&values).map(|((d, a), u)| d + I * a * u).collect::<Vec<_>>()
        });
        Ok(Self { grid: *sp.grid(), beta, conjugated, u: values, rho, a, du, cov })
    }

    fn h2(&self) -> f64 {
        let h = self.grid.spacing();
        h * h
    }

    fn terms(&self, gamma: f64, v: &DensityField) -> Result<EnergyTerms> {
        let h2 = self.h2();
        let kinetic_magnetic =
            h2 * self.cov.iter().flat_map(|c| c.iter()).map(|w| w.norm_sqr()).sum::<f64>();
        if !kinetic_magnetic.is_finite() {
            return Err(Error::NonFinite("kinetic_magnetic"));
        }
        let l4norm = h2 * self.rho.iter().map(|r| r * r).sum::<f64>();
        let quartic = gamma * l4norm;
        if !quartic.is_finite() {
            return Err(Error::NonFinite("quartic"));
        }
        let potential = h2 * self.rho.iter().zip(v.values()).map(|(r, v)| r * v).sum::<f64>();
        if !potential.is_finite() {
            return Err(Error::NonFinite("potential"));
        }
        let norm = h2 * self.rho.iter().sum::<f64>();
        Ok(EnergyTerms { kinetic_magnetic, l4norm, quartic, potential, norm })
    }

    /// `H[u]u` in the (possibly conjugated) frame of `self.u`.
    fn apply(&self, sp: &Spectral, gamma: f64, v: &DensityField) -> Vec<Complex64> {
        let n2 = self.u.len();
        // −Σ_j D_j D_j u with D_j = ∂_j + iβA_j
        let div = sp.divergence_raw(&self.cov[0], &self.cov[1]);
        let mut out: Vec<Complex64> = (0..n2)
            .map(|i| -div[i] - I * (self.a[0][i] * self.cov[0][i] + self.a[1][i] * self.cov[1][i]))
            .collect();
        if self.beta != 0.0 {
            // −2β (K ·∗ (βAρ + J)) u
            let f = [0, 1].map(|j| {
                (0..n2)
                    .map(|i| self.a[j][i] * self.rho[i] + (self.u[i].conj() * self.du[j][i]).im)
                    .collect::<Vec<f64>>()
            });
            let kf = sp.grad_perp_log_dot(&f[0], &f[1]);
            for i in 0..n2 {
                out[i] -= 2.0 * self.beta * kf[i] * self.u[i];
            }
        }
        for i in 0..n2 {
            out[i] += (2.0 * gamma * self.rho[i] + v.values()[i]) * self.u[i];
        }
        out
    }

    fn unframe(&self, mut values: Vec<Complex64>) -> Vec<Complex64> {
        if self.conjugated {
            values.iter_mut().for_each(|v| *v = v.conj());
        }
        values
    }
}

/// Kinetic, quartic and potential terms only; cheaper than [`evaluate`].
pub fn evaluate_terms(sp: &Spectral, u: &Field, c: &Coupling) -> Result<EnergyTerms> {
    Prepared::new(sp, u, c)?.terms()
}

/// Full report, including the Euler–Lagrange residual and multiplier.
pub fn evaluate(sp: &Spectral, u: &Field, c: &Coupling) -> Result<EnergyReport> {
    Ok(evaluate_with_gradient(sp, u, c)?.0)
}

/// [`evaluate`] together with `H[u]u`, sharing the intermediate work.
pub fn evaluate_with_gradient(sp: &Spectral, u: &Field, c: &Coupling) -> Result<(EnergyReport, Field)> {
    Prepared::new(sp, u, c)?.report_and_gradient(sp, c.gamma)
}

/// Self-field and covariant derivatives of one state, shared between the
/// energy terms and the gradient. The γ term needs no convolution, so the
/// gradient can be taken at any γ from the same preparation.
pub(crate) struct Prepared {
    st: State,
    v: DensityField,
    gamma: f64,
}

impl Prepared {
    pub(crate) fn new(sp: &Spectral, u: &Field, c: &Coupling) -> Result<Self> {
        Ok(Self { v: c.potential.sample(sp.grid())?, st: State::new(sp, u, c.beta)?, gamma: c.gamma })
    }

    pub(crate) fn terms(&self) -> Result<EnergyTerms> {
        self.st.terms(self.gamma, &self.v)
    }

    pub(crate) fn report_and_gradient(&self, sp: &Spectral, gamma: f64) -> Result<(EnergyReport, Field)> {
        report_and_gradient(sp, &self.st, gamma, &self.v)
    }
}

fn report_and_gradient(sp: &Spectral, st: &State, gamma: f64, v: &DensityField) -> Result<(EnergyReport, Field)> {
    let t = st.terms(gamma, v)?;
    let hu = st.apply(sp, gamma, v);
    if hu.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite("el_gradient"));
    }
    let h2 = st.h2();
    let pairing = h2 * st.u.iter().zip(&hu).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
    let multiplier = if t.norm > 0.0 { pairing / t.norm } else { 0.0 };
    let el_residual =
        (h2 * hu.iter().zip(&st.u).map(|(h, u)| (h - multiplier * u).norm_sqr()).sum::<f64>()).sqrt();
    let report = EnergyReport {
        kinetic_magnetic: t.kinetic_magnetic,
        quartic: t.quartic,
        potential: t.potential,
        total: t.total(),
        l4norm: t.l4norm,
        bogomolnyi_defect: t.kinetic_magnetic - 2.0 * PI * st.beta * t.l4norm,
        el_residual,
        multiplier,
        norm: t.norm,
        normalized: (t.norm - 1.0).abs() <= NORM_TOLERANCE,
    };
    Ok((report, Field::from_parts(st.grid, st.unframe(hu))))
}

/// `H[u]u`, half the unconstrained `L²` gradient of the energy.
pub fn el_gradient(sp: &Spectral, u: &Field, c: &Coupling) -> Result<Field> {
    Ok(evaluate_with_gradient(sp, u, c)?.1)
}

/// `u_λ(x) = λ u(λx)`, resampled by trigonometric interpolation.
///
/// For `λ < 1` the dilated field spreads; it is an error if more than
/// [`DILATE_MASS_TOLERANCE`] of the mass would leave the box.
pub fn dilate(sp: &Spectral, u: &Field, scale: f64) -> Result<Field> {
    sp.grid().check_same(u.grid())?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidArgument(format!("dilation scale must be positive, got {scale}")));
    }
    if scale == 1.0 {
        return Ok(u.clone());
    }
    if scale < 1.0 {
        let edge = scale * sp.grid().half_width();
        let total = u.mass();
        let g = sp.grid();
        let h2 = g.spacing() * g.spacing();
        let outside = h2
            * u.values()
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let (x, y) = g.point(*i);
                    x < -edge || x >= edge || y < -edge || y >= edge
                })
                .map(|(_, v)| v.norm_sqr())
                .sum::<f64>();
        if total > 0.0 && outside / total > DILATE_MASS_TOLERANCE {
            return Err(Error::SupportOverflow { scale, lost: outside / total });
        }
    }
    Ok(dilate_unchecked(sp, u, scale))
}

pub(crate) fn dilate_unchecked(sp: &Spectral, u: &Field, scale: f64) -> Field {
    sp.resample_scaled(u, scale).scaled(Complex64::new(scale, 0.0))
}

/// `(𝓔_{β,0,0}[u], ∫|∇|u||²)`; the diamagnetic inequality says the first is
/// at least the second.
///
/// `∇|u|` is evaluated pointwise as `Re(ū∇u)/|u|`, so the inequality holds
/// node by node and no differentiation of `|u|` (which has cusps at vortices) is needed.
pub fn diamagnetic_check(sp: &Spectral, u: &Field, beta: f64) -> Result<(f64, f64)> {
    let st = State::new(sp, u, beta)?;
    let lhs = st.terms(0.0, &DensityField::zeros(st.grid))?.kinetic_magnetic;
    let mut rhs = 0.0;
    for i in 0..st.u.len() {
        if st.rho[i] > 0.0 {
            let uc = st.u[i].conj();
            let gx = (uc * st.du[0][i]).re;
            let gy = (uc * st.du[1][i]).re;
            rhs += (gx * gx + gy * gy) / st.rho[i];
        }
    }
    Ok((lhs, st.h2() * rhs))
}

/// `|∫(|Du|² − B|u|²) − ∫|(∂₁ − i∂₂)(e^{−ψ/2}u)|² e^ψ|` with `B = 2πβ|u|²` and
/// `ψ` the superpotential of `|u|²`.
pub fn susy_factorization_check(sp: &Spectral, u: &Field, beta: f64) -> Result<f64> {
    let st = State::new(sp, u, beta)?;
    let t = st.terms(0.0, &DensityField::zeros(st.grid))?;
    let lhs = t.kinetic_magnetic - 2.0 * PI * st.beta * t.l4norm;
    let rho = DensityField::from_parts(st.grid, st.rho.clone());
    let psi = selfmag::superpotential(sp, &rho, st.beta)?;
    let g: Vec<Complex64> = st.u.iter().zip(psi.values()).map(|(u, p)| u * (-0.5 * p).exp()).collect();
    let [gx, gy] = sp.gradient_raw(&g);
    let rhs = st.h2()
        * gx.iter()
            .zip(&gy)
            .zip(psi.values())
            .map(|((a, b), p)| (a - I * b).norm_sqr() * p.exp())
            .sum::<f64>();
    if !rhs.is_finite() {
        return Err(Error::NonFinite("susy factorization"));
    }
    Ok((lhs - rhs).abs())
}

/// `(finite difference, analytic)` directional derivatives of `t ↦ 𝓔[(u + tv)/‖u + tv‖]` at `t = 0`.
///
/// The analytic value is `2Re⟨v, Hu − λu⟩` for normalized `u`; the finite
/// difference is centred with step `step`.
pub fn directional_derivative_check(
    sp: &Spectral,
    u: &Field,
    v: &Field,
    c: &Coupling,
    step: f64,
) -> Result<(f64, f64)> {
    sp.grid().check_same(v.grid())?;
    let u = u.normalized();
    let (rep, hu) = evaluate_with_gradient(sp, &u, c)?;
    let h2 = sp.grid().spacing().powi(2);
    let analytic = 2.0
        * h2
        * v.values()
            .iter()
            .zip(hu.values().iter().zip(u.values()))
            .map(|(v, (h, u))| (v.conj() * (h - rep.multiplier * u)).re)
            .sum::<f64>();
    let e = |t: f64| -> Result<f64> {
        let w = Field::from_parts(*sp.grid(), u.values().iter().zip(v.values()).map(|(a, b)| a + t * b).collect());
        Ok(evaluate_terms(sp, &w.normalized(), c)?.total())
    };
    let fd = (e(step)? - e(-step)?) / (2.0 * step);
    Ok((fd, analytic))
}
