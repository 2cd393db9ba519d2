//! Discrete fields on a uniform square grid: spectral differentiation,
//! free-space convolution and quadrature.

mod convolve;
mod fft;
mod grid;
pub mod io;

use std::sync::OnceLock;

use num_complex::Complex64;

pub use convolve::Kernel;
pub use fft::Fft2;
pub use grid::{relative_l2_error, relative_l2_error_vec, DensityField, Field, Grid, VectorField};

use convolve::FreeSpaceKernels;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sources with more than this fraction of their mass outside `r = L/2` get a warning flag.
pub const CORE_MASS_TOLERANCE: f64 = 1e-4;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `h² Σ values`. Errors on non-finite entries.
pub fn integrate(f: &DensityField) -> Result<f64> {
    if f.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("integrand"));
    }
    Ok(f.mass())
}

/// Output of [`Spectral::free_space_convolve`].
#[derive(Debug, Clone)]
pub enum Convolved {
    Vector(VectorField),
    Scalar(DensityField),
}

#[derive(Debug, Clone)]
pub struct Convolution {
    pub field: Convolved,
    /// `∫ρ` of the source.
    pub total_mass: f64,
    /// Fraction of the source mass outside `r = L/2`.
    pub outside_core_fraction: f64,
    /// Set when `outside_core_fraction` exceeds [`CORE_MASS_TOLERANCE`].
    pub core_warning: bool,
}

impl Convolution {
    pub fn into_vector(self) -> Option<VectorField> {
        match self.field {
            Convolved::Vector(v) => Some(v),
            Convolved::Scalar(_) => None,
        }
    }

    pub fn into_scalar(self) -> Option<DensityField> {
        match self.field {
            Convolved::Scalar(s) => Some(s),
            Convolved::Vector(_) => None,
        }
    }
}

/// Transform plans and wavenumbers for one grid.
///
/// Cheap to build; the free-space kernels are built lazily on first use and
/// then reused for the lifetime of the value.
pub struct Spectral {
    grid: Grid,
    fft: Fft2,
    /// Derivative wavenumbers with the Nyquist mode zeroed.
    kd: Vec<f64>,
    kernels: OnceLock<FreeSpaceKernels>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut kd = grid.wavenumbers();
        kd[grid.n() / 2] = 0.0;
        Self { grid, fft: Fft2::new(grid.n()), kd, kernels: OnceLock::new() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn kernels(&self) -> &FreeSpaceKernels {
        self.kernels.get_or_init(|| FreeSpaceKernels::build(&self.grid))
    }

    pub(crate) fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fft.forward(&mut buf);
        buf
    }

    pub(crate) fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.fft.inverse(&mut spectrum);
        spectrum
    }

    fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        buf
    }

    /// Applies the Fourier multiplier `m(k₁, k₂)` (given derivative wavenumbers).
    fn apply(&self, values: &[Complex64], m: impl Fn(f64, f64) -> Complex64) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut s = self.forward(values);
        for (idx, v) in s.iter_mut().enumerate() {
            *v *= m(self.kd[idx % n], self.kd[idx / n]);
        }
        self.inverse(s)
    }

    /// Spectral partial derivatives of raw samples.
    pub(crate) fn gradient_raw(&self, values: &[Complex64]) -> [Vec<Complex64>; 2] {
        let n = self.grid.n();
        let s = self.forward(values);
        let mut dx = s.clone();
        let mut dy = s;
        for idx in 0..dx.len() {
            dx[idx] *= Complex64::new(0.0, self.kd[idx % n]);
            dy[idx] *= Complex64::new(0.0, self.kd[idx / n]);
        }
        [self.inverse(dx), self.inverse(dy)]
    }

    /// `∂₁a + ∂₂b` for raw samples.
    pub(crate) fn divergence_raw(&self, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let sa = self.forward(a);
        let sb = self.forward(b);
        let out = sa
            .iter()
            .zip(&sb)
            .enumerate()
            .map(|(idx, (x, y))| {
                Complex64::new(0.0, self.kd[idx % n]) * x + Complex64::new(0.0, self.kd[idx / n]) * y
            })
            .collect();
        self.inverse(out)
    }

    /// Spectral `(∂₁u, ∂₂u)` on the periodic extension.
    pub fn gradient(&self, u: &Field) -> (Field, Field) {
        let [dx, dy] = self.gradient_raw(u.values());
        (Field::from_parts(self.grid, dx), Field::from_parts(self.grid, dy))
    }

    pub fn divergence(&self, a: &Field, b: &Field) -> Field {
        Field::from_parts(self.grid, self.divergence_raw(a.values(), b.values()))
    }

    /// Spectral Laplacian, `−(k₁² + k₂²)` with the Nyquist modes zeroed so that it
    /// agrees with `divergence ∘ gradient`.
    pub fn laplacian(&self, u: &Field) -> Field {
        Field::from_parts(self.grid, self.apply(u.values(), |a, b| Complex64::new(-(a * a + b * b), 0.0)))
    }

    pub(crate) fn laplacian_real(&self, f: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let mut s = self.forward_real(f);
        for (idx, v) in s.iter_mut().enumerate() {
            let (a, b) = (self.kd[idx % n], self.kd[idx / n]);
            *v *= -(a * a + b * b);
        }
        self.inverse(s).into_iter().map(|v| v.re).collect()
    }

    /// Zeroes the Nyquist row and column. Those modes carry no kinetic energy
    /// under the spectral derivative, so a descent must not be allowed to fill them.
    pub(crate) fn drop_nyquist(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut s = self.forward(values);
        for (idx, v) in s.iter_mut().enumerate() {
            if idx % n == n / 2 || idx / n == n / 2 {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        self.inverse(s)
    }

    /// `(α − Δ)⁻¹ u`, used as a Sobolev preconditioner.
    pub fn helmholtz_inverse(&self, u: &Field, alpha: f64) -> Field {
        Field::from_parts(self.grid, self.apply(u.values(), |a, b| Complex64::new(1.0 / (alpha + a * a + b * b), 0.0)))
    }

    /// Exact shift by `(dx, dy)` of the trigonometric interpolant.
    pub fn translate(&self, u: &Field, dx: f64, dy: f64) -> Field {
        let k = self.grid.wavenumbers();
        let n = self.grid.n();
        let mut s = self.forward(u.values());
        for (idx, v) in s.iter_mut().enumerate() {
            let (a, b) = (idx % n, idx / n);
            // Nyquist modes are shifted by their real part only.
            let shift = |m: usize, d: f64| {
                if m == n / 2 {
                    Complex64::new((k[m] * d).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, -k[m] * d)
                }
            };
            *v *= shift(a, dx) * shift(b, dy);
        }
        Field::from_parts(self.grid, self.inverse(s))
    }

    /// `∫|u|²` evaluated from Fourier coefficients, `(h²/n²) Σ|û|²`.
    pub fn spectral_mass(&self, u: &Field) -> f64 {
        let h = self.grid.spacing();
        let n2 = self.grid.len() as f64;
        h * h / n2 * self.forward(u.values()).iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Spectral `∂₁A₂ − ∂₂A₁` on the periodic extension.
    pub fn curl(&self, a: &VectorField) -> DensityField {
        let n = self.grid.n();
        let sx = self.forward_real(&a.x);
        let sy = self.forward_real(&a.y);
        let out = sx
            .iter()
            .zip(&sy)
            .enumerate()
            .map(|(idx, (ax, ay))| {
                Complex64::new(0.0, self.kd[idx % n]) * ay - Complex64::new(0.0, self.kd[idx / n]) * ax
            })
            .collect();
        DensityField::from_parts(self.grid, self.inverse(out).into_iter().map(|v| v.re).collect())
    }

    pub fn div(&self, a: &VectorField) -> DensityField {
        let n = self.grid.n();
        let sx = self.forward_real(&a.x);
        let sy = self.forward_real(&a.y);
        let out = sx
            .iter()
            .zip(&sy)
            .enumerate()
            .map(|(idx, (ax, ay))| {
                Complex64::new(0.0, self.kd[idx % n]) * ax + Complex64::new(0.0, self.kd[idx / n]) * ay
            })
            .collect();
        DensityField::from_parts(self.grid, self.inverse(out).into_iter().map(|v| v.re).collect())
    }

    /// Curl of a non-periodic field, valid for `r < inner`.
    ///
    /// The field is multiplied by a smooth cutoff equal to one on the disk of
    /// radius `inner` and vanishing beyond `outer` before differentiating, so
    /// the result is exact (spectrally) wherever the cutoff is flat.
    pub fn windowed_curl(&self, a: &VectorField, inner: f64, outer: f64) -> DensityField {
        let w = self.grid.window(inner, outer);
        let wa = VectorField::from_parts(
            self.grid,
            a.x.iter().zip(w.values()).map(|(v, w)| v * w).collect(),
            a.y.iter().zip(w.values()).map(|(v, w)| v * w).collect(),
        );
        self.curl(&wa)
    }

    pub fn windowed_div(&self, a: &VectorField, inner: f64, outer: f64) -> DensityField {
        let w = self.grid.window(inner, outer);
        let wa = VectorField::from_parts(
            self.grid,
            a.x.iter().zip(w.values()).map(|(v, w)| v * w).collect(),
            a.y.iter().zip(w.values()).map(|(v, w)| v * w).collect(),
        );
        self.div(&wa)
    }

    /// Laplacian of a non-periodic real field, valid for `r < inner`.
    pub fn windowed_laplacian(&self, f: &DensityField, inner: f64, outer: f64) -> DensityField {
        let w = self.grid.window(inner, outer);
        let wf: Vec<f64> = f.values().iter().zip(w.values()).map(|(a, b)| a * b).collect();
        DensityField::from_parts(self.grid, self.laplacian_real(&wf))
    }

    /// `Σ_j (K_j ∗ f_j)` for the components of `∇⊥log|x|`, without validation.
    pub(crate) fn grad_perp_log_dot(&self, fx: &[f64], fy: &[f64]) -> Vec<f64> {
        let k = self.kernels();
        let n = self.grid.n();
        // with K = (kx, ky) = (−∂₂w₀, ∂₁w₀) real, Re[(kx − i ky) ∗ (fx + i fy)] = K·∗f
        let s = k.pad_forward(fx.iter().zip(fy).map(|(&a, &b)| Complex64::new(a, b)), n);
        let combined = (0..s.len()).map(|i| (-k.d2[i] - I * k.d1[i]) * s[i]).collect();
        k.inverse_crop(combined, n).into_iter().map(|v| v.re).collect()
    }

    /// `(∇⊥log|x|) ∗ ρ` without validation.
    pub(crate) fn grad_perp_log_raw(&self, rho: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.kernels();
        let n = self.grid.n();
        let s = k.pad_forward(rho.iter().map(|&v| Complex64::new(v, 0.0)), n);
        // both components are real, so they travel as the real and imaginary parts of one transform
        let a = (0..s.len()).map(|i| (-k.d2[i] + I * k.d1[i]) * s[i]).collect();
        k.inverse_crop(a, n).into_iter().map(|v| (v.re, v.im)).unzip()
    }

    /// `log|x| ∗ ρ` without validation.
    pub(crate) fn log_raw(&self, rho: &[f64]) -> Vec<f64> {
        let k = self.kernels();
        let n = self.grid.n();
        let s = k.pad_forward(rho.iter().map(|&v| Complex64::new(v, 0.0)), n);
        let out = s.iter().zip(&k.log).map(|(a, b)| a * b).collect();
        k.inverse_crop(out, n).into_iter().map(|v| v.re).collect()
    }

    /// Aperiodic (free-space) convolution of `rho` with the named kernel.
    pub fn free_space_convolve(&self, kernel: Kernel, rho: &DensityField) -> Result<Convolution> {
        self.grid.check_same(rho.grid())?;
        if rho.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("convolution source"));
        }
        let total_mass = rho.mass();
        let outside_core_fraction = rho.mass_outside(self.grid.half_width() / 2.0);
        let field = match kernel {
            Kernel::GradPerpLog => {
                let (x, y) = self.grad_perp_log_raw(rho.values());
                Convolved::Vector(VectorField::from_parts(self.grid, x, y))
            }
            Kernel::Log => Convolved::Scalar(DensityField::from_parts(self.grid, self.log_raw(rho.values()))),
        };
        Ok(Convolution {
            field,
            total_mass,
            outside_core_fraction,
            core_warning: outside_core_fraction > CORE_MASS_TOLERANCE,
        })
    }

    /// Samples the trigonometric interpolant of `u` at `u(scale·x)` for every node.
    ///
    /// Nodes whose image `scale·x` leaves the box get zero.
    pub(crate) fn resample_scaled(&self, u: &Field, scale: f64) -> Field {
        let n = self.grid.n();
        let l = self.grid.half_width();
        let k = self.grid.wavenumbers();
        // 1D interpolation matrix W[i][j] = value at scale·x_i of the cardinal function of node j.
        let mut w = vec![ZERO; n * n];
        for i in 0..n {
            let t = scale * self.grid.coord(i);
            if t < -l || t >= l {
                continue;
            }
            for j in 0..n {
                let d = t - self.grid.coord(j);
                let mut acc = ZERO;
                for (m, &km) in k.iter().enumerate() {
                    if m == n / 2 {
                        acc += Complex64::new((km * d).cos(), 0.0);
                    } else {
                        acc += Complex64::from_polar(1.0, km * d);
                    }
                }
                w[i * n + j] = acc / n as f64;
            }
        }
        let src = u.values();
        // rows: tmp[iy][i] = Σ_j W[i][j] src[iy][j]
        let mut tmp = vec![ZERO; n * n];
        for iy in 0..n {
            let row = &src[iy * n..(iy + 1) * n];
            for i in 0..n {
                let wi = &w[i * n..(i + 1) * n];
                tmp[iy * n + i] = wi.iter().zip(row).map(|(a, b)| a * b).sum();
            }
        }
        // columns: out[i][ix] = Σ_j W[i][j] tmp[j][ix]
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let wi = &w[i * n..(i + 1) * n];
            for (j, &wij) in wi.iter().enumerate() {
                if wij == ZERO {
                    continue;
                }
                let trow = &tmp[j * n..(j + 1) * n];
                let orow = &mut out[i * n..(i + 1) * n];
                for (o, t) in orow.iter_mut().zip(trow) {
                    *o += wij * t;
                }
            }
        }
        Field::from_parts(self.grid, out)
    }
}
