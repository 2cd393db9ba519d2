use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

const ROWS_PER_TASK: usize = 8;

/// Square 2D FFT done as row transforms, a transpose, row transforms, and a transpose back.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(&self.forward, data);
    }

    /// Inverse transform in place, normalized by `1/n²`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(&self.inverse, data);
        let scale = 1.0 / (self.n * self.n) as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }

    /// Forward transform of a buffer whose rows from `live` on are zero.
    pub fn forward_leading_rows(&self, data: &mut [Complex64], live: usize) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer does not match transform size");
        data[..live * n].par_chunks_mut(n * ROWS_PER_TASK).for_each(|rows| self.forward.process(rows));
        transpose_in_place(data, n);
        data.par_chunks_mut(n * ROWS_PER_TASK).for_each(|rows| self.forward.process(rows));
        transpose_in_place(data, n);
    }

    /// Normalized inverse transform that is exact only on the first `keep` rows.
    pub fn inverse_leading_rows(&self, data: &mut [Complex64], keep: usize) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer does not match transform size");
        transpose_in_place(data, n);
        data.par_chunks_mut(n * ROWS_PER_TASK).for_each(|rows| self.inverse.process(rows));
        transpose_in_place(data, n);
        let scale = 1.0 / (n * n) as f64;
        data[..keep * n].par_chunks_mut(n * ROWS_PER_TASK).for_each(|rows| {
            self.inverse.process(rows);
            rows.iter_mut().for_each(|v| *v *= scale);
        });
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer does not match transform size");
        data.par_chunks_mut(n * ROWS_PER_TASK).for_each(|rows| plan.process(rows));
        transpose_in_place(data, n);
        data.par_chunks_mut(n * ROWS_PER_TASK).for_each(|rows| plan.process(rows));
        transpose_in_place(data, n);
    }
}

fn transpose_in_place(data: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}
