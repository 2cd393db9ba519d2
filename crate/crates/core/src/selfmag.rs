//! Magnetic self-interaction: the vector potential `A[ρ] = (∇⊥w₀) ∗ ρ`, the
//! superpotential `ψ` with `βA = −½∇⊥ψ`, and the probability current `J[u]`.
//!
//! `A` is stored without the coupling `β`; callers scale it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{DensityField, Field, Kernel, Spectral, VectorField};

/// `A[ρ]` together with its source and bookkeeping used for far-field checks.
#[derive(Debug, Clone)]
pub struct SelfPotential {
    pub a: VectorField,
    pub source: DensityField,
    pub total_mass: f64,
    pub outside_core_fraction: f64,
    pub core_warning: bool,
}

fn check_density(sp: &Spectral, rho: &DensityField) -> Result<()> {
    sp.grid().check_same(rho.grid())?;
    if !rho.is_nonnegative() {
        return Err(Error::InvalidArgument("density must be nonnegative".into()));
    }
    Ok(())
}

/// `A[ρ](x) = ∫ (x−y)⊥/|x−y|² ρ(y) dy`, divergence-free by construction.
pub fn self_potential(sp: &Spectral, rho: &DensityField) -> Result<SelfPotential> {
    check_density(sp, rho)?;
    let conv = sp.free_space_convolve(Kernel::GradPerpLog, rho)?;
    let (total_mass, outside_core_fraction, core_warning) =
        (conv.total_mass, conv.outside_core_fraction, conv.core_warning);
    let a = conv.into_vector().expect("vector kernel");
    Ok(SelfPotential { a, source: rho.clone(), total_mass, outside_core_fraction, core_warning })
}

/// `ψ = −2β (w₀ ∗ ρ)`, so that `−½∇⊥ψ = βA[ρ]` and `−½Δψ = 2πβρ`.
///
/// The free-space Green's function fixes the additive constant: `ψ(x) ≈ −2β m log|x|` far out.
pub fn superpotential(sp: &Spectral, rho: &DensityField, beta: f64) -> Result<DensityField> {
    check_density(sp, rho)?;
    if beta == 0.0 {
        return Ok(DensityField::zeros(*sp.grid()));
    }
    let conv = sp.free_space_convolve(Kernel::Log, rho)?;
    Ok(conv.into_scalar().expect("scalar kernel").scaled(-2.0 * beta))
}

/// `J[u] = (i/2)(u∇ū − ū∇u) = Re u ∇Im u − Im u ∇Re u`.
///
/// Real and imaginary parts are differentiated separately so that
/// `current(ū) = −current(u)` holds bit for bit.
pub fn current(sp: &Spectral, u: &Field) -> VectorField {
    let re: Vec<Complex64> = u.values().iter().map(|v| Complex64::new(v.re, 0.0)).collect();
    let im: Vec<Complex64> = u.values().iter().map(|v| Complex64::new(v.im, 0.0)).collect();
    let [dre_x, dre_y] = sp.gradient_raw(&re);
    let [dim_x, dim_y] = sp.gradient_raw(&im);
    let n = u.values().len();
    let mut jx = Vec::with_capacity(n);
    let mut jy = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (re[i].re, im[i].re);
        jx.push(a * dim_x[i].re - b * dre_x[i].re);
        jy.push(a * dim_y[i].re - b * dre_y[i].re);
    }
    VectorField::from_parts(*sp.grid(), jx, jy)
}
