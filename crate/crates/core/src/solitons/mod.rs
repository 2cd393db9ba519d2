//! Exact self-dual solitons on the nonlinear Landau level and the radial
//! Townes profile.
//!
//! For coprime, linearly independent polynomials `P, Q` with
//! `n = max(deg P, deg Q)` and `β = 2n`,
//!
//! ```text
//! u_{P,Q} = √(2/(πβ)) · conj(P′Q − PQ′) / (|P|² + |Q|²)
//! ψ_{P,Q} = log 8 − 2 log(|P|² + |Q|²)
//! ```
//!
//! and `ψ_{P,Q}` solves `−Δψ = |f|² e^ψ` with `f = P′Q − PQ′` the Wronskian.

mod poly;
mod townes;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

pub use poly::{Poly, GCD_TOLERANCE};
pub use townes::{townes_profile, TownesProfile};

use crate::error::{Error, Result};
use crate::spectral::{DensityField, Field, Grid, Spectral};

/// Sup-norm distance below which [`gauge_orbit_test`] declares two states equal.
pub const ORBIT_TOLERANCE: f64 = 1e-10;

/// A validated pair `(P, Q)` parametrizing one soliton.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyPair {
    p: Poly,
    q: Poly,
    n_flux_half: usize,
}

/// `P′Q − PQ′`.
/// Leading Wronskian coefficients below this fraction of `max|coeff|²` are
/// cancellation residue (the `z^{2n−1}` term always cancels exactly).
const CANCELLATION_TOLERANCE: f64 = 1e-12;

fn wronskian_of(p: &Poly, q: &Poly) -> Poly {
    let w = &(&p.derivative() * q) - &(p * &q.derivative());
    let scale = p.coeffs().iter().chain(q.coeffs()).map(|c| c.norm()).fold(0.0, f64::max);
    let floor = CANCELLATION_TOLERANCE * scale * scale;
    let mut c = w.coeffs().to_vec();
    while c.last().is_some_and(|v| v.norm() <= floor) {
        c.pop();
    }
    Poly::new(c)
}

impl PolyPair {
    /// Checks linear independence (nonzero Wronskian), coprimality and `max(deg P, deg Q) ≥ 1`.
    pub fn new(p: Poly, q: Poly) -> Result<Self> {
        if p.is_zero() || q.is_zero() {
            return Err(Error::InvalidPair("P and Q must both be nonzero".into()));
        }
        let n_flux_half = p.degree().unwrap().max(q.degree().unwrap());
        if n_flux_half == 0 {
            return Err(Error::InvalidPair("at least one polynomial must be nonconstant".into()));
        }
        let w = wronskian_of(&p, &q);
        let scale = p.coeffs().iter().chain(q.coeffs()).map(|c| c.norm()).fold(0.0, f64::max);
        if w.coeffs().iter().all(|c| c.norm() <= GCD_TOLERANCE * scale * scale) {
            return Err(Error::DependentPolynomials);
        }
        let g = p.gcd(&q, GCD_TOLERANCE);
        if let Some(d) = g.degree() {
            if d > 0 {
                return Err(Error::NotCoprime(d));
            }
        }
        Ok(Self { p, q, n_flux_half })
    }

    pub fn parse(p: &str, q: &str) -> Result<Self> {
        Self::new(Poly::parse(p)?, Poly::parse(q)?)
    }

    /// The versiera `(z, 1)`.
    pub fn versiera() -> Self {
        Self::vortex_ring(1)
    }

    /// `(zⁿ, 1)`: a single zero of order `n − 1` at the origin.
    pub fn vortex_ring(n: usize) -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self::new(Poly::monomial(n, one), Poly::constant(one)).expect("zⁿ and 1 are a valid pair")
    }

    pub fn p(&self) -> &Poly {
        &self.p
    }

    pub fn q(&self) -> &Poly {
        &self.q
    }

    pub fn n_flux_half(&self) -> usize {
        self.n_flux_half
    }

    /// `β = 2·max(deg P, deg Q)`.
    pub fn beta(&self) -> f64 {
        2.0 * self.n_flux_half as f64
    }

    /// `(aP + bQ, cP + dQ)` for `m = [[a, b], [c, d]]`.
    pub fn transform(&self, m: [[Complex64; 2]; 2]) -> Result<Self> {
        let p = &self.p.scale(m[0][0]) + &self.q.scale(m[0][1]);
        let q = &self.p.scale(m[1][0]) + &self.q.scale(m[1][1]);
        Self::new(p, q)
    }

    /// `|P(z)|² + |Q(z)|²`.
    pub fn weight(&self, z: Complex64) -> f64 {
        self.p.eval(z).norm_sqr() + self.q.eval(z).norm_sqr()
    }
}

/// `P′Q − PQ′`; its degree is the vorticity `M`.
pub fn wronskian(pair: &PolyPair) -> Result<Poly> {
    let w = wronskian_of(&pair.p, &pair.q);
    if w.is_zero() {
        return Err(Error::DependentPolynomials);
    }
    Ok(w)
}

fn z_of(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

/// `u_{P,Q}` sampled on the grid, with the analytic prefactor (no renormalization).
pub fn nll_state(pair: &PolyPair, grid: &Grid) -> Field {
    let f = wronskian_of(&pair.p, &pair.q);
    let c = (2.0 / (PI * pair.beta())).sqrt();
    Field::from_fn(*grid, |x, y| {
        let z = z_of(x, y);
        f.eval(z).conj() * (c / pair.weight(z))
    })
}

/// `ψ_{P,Q} = log 8 − 2 log(|P|² + |Q|²)`.
pub fn nll_superpotential(pair: &PolyPair, grid: &Grid) -> DensityField {
    DensityField::from_fn(*grid, |x, y| 8f64.ln() - 2.0 * pair.weight(z_of(x, y)).ln())
}

/// `|f|² e^ψ` on the grid; its integral is `8π·n_flux_half` for `ψ = ψ_{P,Q}`.
pub fn liouville_source(psi: &DensityField, f: &Poly) -> DensityField {
    let g = *psi.grid();
    DensityField::new(
        g,
        g.points().zip(psi.values()).map(|((x, y), p)| f.eval(z_of(x, y)).norm_sqr() * p.exp()).collect(),
    )
    .unwrap_or_else(|_| DensityField::zeros(g))
}

/// Relative `L²` norm of `−Δψ − |f|²e^ψ` on the disk `r < L/2`, excluding disks of
/// radius `3h` around the zeros of `f`.
///
/// The Laplacian of the non-periodic `ψ` is taken after a smooth cutoff that
/// is flat on the evaluation disk.
pub fn liouville_residual(sp: &Spectral, psi: &DensityField, f: &Poly) -> Result<f64> {
    let g = *sp.grid();
    g.check_same(psi.grid())?;
    if psi.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("superpotential"));
    }
    let l = g.half_width();
    let core = 0.5 * l;
    let lap = sp.windowed_laplacian(psi, core, 0.95 * l);
    let source = liouville_source(psi, f);
    let roots = f.roots();
    let exclude = 3.0 * g.spacing();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, (x, y)) in g.points().enumerate() {
        if x * x + y * y >= core * core {
            continue;
        }
        let z = z_of(x, y);
        if roots.iter().any(|r| (z - r).norm() < exclude) {
            continue;
        }
        let s = source.values()[i];
        num += (-lap.values()[i] - s).powi(2);
        den += s * s;
    }
    if den == 0.0 {
        return Err(Error::InvalidArgument("Liouville source vanishes on the core".into()));
    }
    Ok((num / den).sqrt())
}

/// `(M, lower, upper) = (deg f, n − 1, 2n − 2)`; errors if `M` falls outside the bounds.
pub fn vorticity_bounds_check(pair: &PolyPair) -> Result<(usize, usize, usize)> {
    let m = wronskian(pair)?.degree().expect("nonzero Wronskian");
    let n = pair.n_flux_half;
    let (lower, upper) = (n - 1, 2 * n - 2);
    if m < lower || m > upper {
        return Err(Error::VorticityBounds { m, lower, upper });
    }
    Ok((m, lower, upper))
}

/// Whether the two pairs produce the same sampled state within [`ORBIT_TOLERANCE`].
pub fn gauge_orbit_test(a: &PolyPair, b: &PolyPair, grid: &Grid) -> bool {
    if a.n_flux_half != b.n_flux_half {
        return false;
    }
    nll_state(a, grid).max_distance(&nll_state(b, grid)) <= ORBIT_TOLERANCE
}

/// A random element of `SU(2)`, `[[a, −b̄], [b, ā]]` with `|a|² + |b|² = 1`.
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> [[Complex64; 2]; 2] {
    let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let a = Complex64::new(v[0], v[1]) / norm;
    let b = Complex64::new(v[2], v[3]) / norm;
    [[a, -b.conj()], [b, a.conj()]]
}

/// Largest `|∇ log(|P|² + |Q|²)|` on a mesh of spacing `step` over `[−extent, extent]²`.
///
/// The reciprocal is the smallest length scale of the soliton; the vortex
/// ring `(zⁿ, 1)` has the value ≈ n.
pub fn max_log_weight_gradient(pair: &PolyPair, extent: f64, step: f64) -> f64 {
    let (dp, dq) = (pair.p.derivative(), pair.q.derivative());
    let m = (extent / step).ceil() as i64;
    let mut worst: f64 = 0.0;
    for iy in -m..=m {
        for ix in -m..=m {
            let z = Complex64::new(ix as f64 * step, iy as f64 * step);
            let (p, q) = (pair.p.eval(z), pair.q.eval(z));
            let dw = dp.eval(z) * p.conj() + dq.eval(z) * q.conj();
            worst = worst.max(2.0 * dw.norm() / (p.norm_sqr() + q.norm_sqr()));
        }
    }
    worst
}

/// Coefficient `T` of the far-field density `|u_{P,Q}|² ≈ T/(π|z|⁴)`.
///
/// Only pairs with the maximal vorticity `M = 2n − 2` decay this slowly;
/// for the others the tail is faster and `T = 0`. The versiera has `T = 1`.
pub fn tail_coefficient(pair: &PolyPair) -> f64 {
    let n = pair.n_flux_half;
    let f = wronskian_of(&pair.p, &pair.q);
    if f.degree() != Some(2 * n - 2) {
        return 0.0;
    }
    let lead = |p: &Poly| p.coeffs().get(n).map_or(0.0, |c| c.norm_sqr());
    let a = lead(&pair.p) + lead(&pair.q);
    (2.0 / pair.beta()) * f.leading().norm_sqr() / (a * a)
}

/// Draws a well-conditioned random pair with `n_flux_half = n`.
///
/// Roots of `P` and `Q` are drawn in the disk of radius `spread`, at least
/// `spread/4` apart, and `Q` gets a random complex scale. Pairs are redrawn
/// when their smallest length scale (see [`max_log_weight_gradient`]) is
/// below `1/(n + 2)` or when their `r⁻⁴` density tail is heavier than twice
/// the versiera's ([`tail_coefficient`] above 2). Accepted solitons are
/// resolved on grids with `h ≈ 0.1` and lose little mass outside `r ≈ 30`.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> PolyPair {
    assert!(n >= 1, "n_flux_half must be at least 1");
    let min_gap = 0.25 * spread;
    let limit = n as f64 + 2.0;
    loop {
        let dq = rng.gen_range(0..=n);
        let mut roots: Vec<Complex64> = Vec::with_capacity(n + dq);
        let mut tries = 0;
        while roots.len() < n + dq && tries < 1000 {
            tries += 1;
            let r = spread * rng.gen::<f64>().sqrt();
            let z = Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI));
            if roots.iter().all(|w| (z - w).norm() >= min_gap) {
                roots.push(z);
            }
        }
        if roots.len() < n + dq {
            continue;
        }
        let scale = Complex64::from_polar(rng.gen_range(0.5..4.0), rng.gen_range(0.0..2.0 * PI));
        let p = Poly::from_roots(&roots[..n], Complex64::new(1.0, 0.0));
        let q = Poly::from_roots(&roots[n..], scale);
        let Ok(pair) = PolyPair::new(p, q) else { continue };
        if tail_coefficient(&pair) <= 2.0 && max_log_weight_gradient(&pair, 2.0 * spread, 0.05) <= limit {
            return pair;
        }
    }
}
