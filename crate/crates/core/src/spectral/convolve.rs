//! Aperiodic convolution with the planar Green's function `w₀ = log|x|` and its gradient.
//!
//! The kernels are built from the exact Fourier transform of the *truncated*
//! kernel `log|x|·1{|x| < R}` with `R` larger than the box diameter, so that
//! the truncation is invisible to any pair of nodes in the box. The transform is
//! sampled on a four-times padded grid, brought back to real space, cut to the
//! offsets that a `(2n)²` zero-padded linear convolution can reach, and
//! re-transformed. At run time a convolution costs one forward and one inverse
//! FFT of size `(2n)²` and is spectrally accurate for smooth sources. The
//! kernels are real, so two real sources or two real outputs share one
//! complex transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::Fft2;
use super::grid::Grid;

/// Kernels available to [`super::Spectral::free_space_convolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `∇⊥ log|x| = x⊥/|x|²`, producing a vector field.
    GradPerpLog,
    /// `log|x|`, producing a scalar field.
    Log,
}

pub(crate) struct FreeSpaceKernels {
    pub fft: Fft2,
    pub log: Vec<Complex64>,
    pub d1: Vec<Complex64>,
    pub d2: Vec<Complex64>,
}

/// Fourier transform of `log|x|` restricted to the disk of radius `r`, at `|k| = kappa`.
pub(crate) fn truncated_log_transform(kappa: f64, r: f64) -> f64 {
    let x = kappa * r;
    if x < 1e-3 {
        // series of R log R J1(x)/κ − (1 − J0(x))/κ²
        let x2 = x * x;
        let j1_over = r * r * (0.5 - x2 / 16.0 + x2 * x2 / 384.0);
        let one_minus_j0 = r * r * (0.25 - x2 / 64.0 + x2 * x2 / 2304.0);
        2.0 * PI * (r.ln() * j1_over - one_minus_j0)
    } else {
        2.0 * PI * (r * r.ln() * libm::j1(x) / kappa - (1.0 - libm::j0(x)) / (kappa * kappa))
    }
}

impl FreeSpaceKernels {
    pub fn build(grid: &Grid) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let l = grid.half_width();
        let fine = 4 * n;
        let padded = 2 * n;
        // Longest offset inside the box is √2·(2L − h) < 3L; nearest periodic image sits 6L away.
        let radius = 3.0 * l;
        let dk = 2.0 * PI / (fine as f64 * h);
        let freq = |m: usize| -> f64 {
            let m = m as isize;
            let f = fine as isize;
            (if m < f / 2 { m } else { m - f }) as f64 * dk
        };
        let nyquist = fine / 2;

        let g_hat: Vec<f64> = (0..fine * fine)
            .into_par_iter()
            .map(|idx| {
                let (a, b) = (freq(idx % fine), freq(idx / fine));
                truncated_log_transform(a.hypot(b), radius)
            })
            .collect();

        let fine_fft = Fft2::new(fine);
        let padded_fft = Fft2::new(padded);
        let to_padded = |mut spectrum: Vec<Complex64>| -> Vec<Complex64> {
            fine_fft.inverse(&mut spectrum);
            let mut out = vec![Complex64::new(0.0, 0.0); padded * padded];
            let n_i = n as isize;
            for oy in -n_i..n_i {
                let fy = oy.rem_euclid(fine as isize) as usize;
                let py = oy.rem_euclid(padded as isize) as usize;
                for ox in -n_i..n_i {
                    let fx = ox.rem_euclid(fine as isize) as usize;
                    let px = ox.rem_euclid(padded as isize) as usize;
                    out[py * padded + px] = Complex64::new(spectrum[fy * fine + fx].re, 0.0);
                }
            }
            padded_fft.forward(&mut out);
            out
        };

        let log = to_padded(g_hat.iter().map(|&g| Complex64::new(g, 0.0)).collect());
        let derivative = |axis: usize| -> Vec<Complex64> {
            (0..fine * fine)
                .into_par_iter()
                .map(|idx| {
                    let m = if axis == 0 { idx % fine } else { idx / fine };
                    if m == nyquist {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(0.0, freq(m) * g_hat[idx])
                    }
                })
                .collect()
        };
        let d1 = to_padded(derivative(0));
        let d2 = to_padded(derivative(1));
        Self { fft: padded_fft, log, d1, d2 }
    }

    /// Zero-pads `src` (n² samples) into the `(2n)²` buffer and transforms it.
    pub fn pad_forward(&self, src: impl ExactSizeIterator<Item = Complex64>, n: usize) -> Vec<Complex64> {
        let p = 2 * n;
        debug_assert_eq!(src.len(), n * n);
        let mut buf = vec![Complex64::new(0.0, 0.0); p * p];
        for (i, v) in src.enumerate() {
            buf[(i / n) * p + i % n] = v;
        }
        self.fft.forward_leading_rows(&mut buf, n);
        buf
    }

    /// Inverse-transforms a padded spectrum and returns the original n² block.
    pub fn inverse_crop(&self, mut spectrum: Vec<Complex64>, n: usize) -> Vec<Complex64> {
        let p = 2 * n;
        self.fft.inverse_leading_rows(&mut spectrum, n);
        let mut out = Vec::with_capacity(n * n);
        for row in 0..n {
            out.extend_from_slice(&spectrum[row * p..row * p + n]);
        }
        out
    }
}
