use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform square grid on `[-L, L)²` with `n` nodes per side.
///
/// Node `(ix, iy)` sits at `(-L + ix·h, -L + iy·h)` and is stored at
/// row-major index `iy·n + ix`. The origin is node `(n/2, n/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n must be a power of two >= 16, got {n}")));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Number of nodes, `n²`.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn point(&self, index: usize) -> (f64, f64) {
        (self.coord(index % self.n), self.coord(index / self.n))
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Angular wavenumbers in FFT order, `k_m = π m / L`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as isize;
        let dk = std::f64::consts::PI / self.half_width;
        (0..n)
            .map(|m| if m < n / 2 { m } else { m - n })
            .map(|m| m as f64 * dk)
            .collect()
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self.n == other.n && self.half_width == other.half_width {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected_n: self.n,
                expected_l: self.half_width,
                found_n: other.n,
                found_l: other.half_width,
            })
        }
    }

    /// Smooth cutoff equal to 1 for `r <= inner`, 0 for `r >= outer`, C^∞ in between.
    pub fn window(&self, inner: f64, outer: f64) -> DensityField {
        DensityField::from_fn(*self, |x, y| window_profile((x * x + y * y).sqrt(), inner, outer))
    }
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

pub(crate) fn window_profile(r: f64, inner: f64, outer: f64) -> f64 {
    1.0 - smooth_step((r - inner) / (outer - inner))
}

/// Complex samples of a wavefunction on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("field values"));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor for values already known to be finite and sized.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = grid.points().map(|(x, y)| f(x, y)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn density(&self) -> DensityField {
        DensityField {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    /// `∫|u|²` by the Riemann sum.
    pub fn mass(&self) -> f64 {
        let h = self.grid.spacing();
        h * h * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn phase_rotated(&self, theta: f64) -> Self {
        self.scaled(Complex64::from_polar(1.0, theta))
    }

    /// Rescaled to unit mass. A zero field is returned unchanged.
    pub fn normalized(&self) -> Self {
        let m = self.mass();
        if m > 0.0 {
            self.scaled(Complex64::new(1.0 / m.sqrt(), 0.0))
        } else {
            self.clone()
        }
    }

    /// Sup-norm distance to another field on the same grid.
    pub fn max_distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Mass fraction lying outside the disk of the given radius.
    pub fn mass_outside(&self, radius: f64) -> f64 {
        self.density().mass_outside(radius)
    }
}

/// Real samples on a [`Grid`]: densities, potentials, superpotentials.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    values: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "density has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("density values"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.points().map(|(x, y)| f(x, y)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn mass(&self) -> f64 {
        let h = self.grid.spacing();
        h * h * self.values.iter().sum::<f64>()
    }

    /// Fraction of `∫|ρ|` lying outside the disk of the given radius.
    pub fn mass_outside(&self, radius: f64) -> f64 {
        let r2 = radius * radius;
        let (mut inside, mut outside) = (0.0, 0.0);
        for ((x, y), v) in self.grid.points().zip(&self.values) {
            if x * x + y * y > r2 {
                outside += v.abs();
            } else {
                inside += v.abs();
            }
        }
        let total = inside + outside;
        if total > 0.0 {
            outside / total
        } else {
            0.0
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Two real components per node (vector potentials, currents).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: Grid, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != grid.len() || y.len() != grid.len() {
            return Err(Error::InvalidArgument("vector component length mismatch".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector field"));
        }
        Ok(Self { grid, x, y })
    }

    pub(crate) fn from_parts(grid: Grid, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { grid, x, y }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, x: vec![0.0; grid.len()], y: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let (x, y) = grid.points().map(|(a, b)| f(a, b)).unzip();
        Self { grid, x, y }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            x: self.x.iter().map(|v| v * c).collect(),
            y: self.y.iter().map(|v| v * c).collect(),
        }
    }

    pub fn magnitude(&self, index: usize) -> f64 {
        self.x[index].hypot(self.y[index])
    }
}

/// Relative discrete L² distance `‖a − b‖ / ‖b‖` restricted to nodes where `mask` holds.
pub fn relative_l2_error(a: &[f64], b: &[f64], mask: impl Fn(usize) -> bool) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..a.len().min(b.len()) {
        if mask(i) {
            num += (a[i] - b[i]).powi(2);
            den += b[i] * b[i];
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Like [`relative_l2_error`] for pairs of components.
pub fn relative_l2_error_vec(a: &VectorField, b: &VectorField, mask: impl Fn(usize) -> bool) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..a.x.len() {
        if mask(i) {
            num += (a.x[i] - b.x[i]).powi(2) + (a.y[i] - b.y[i]).powi(2);
            den += b.x[i].powi(2) + b.y[i].powi(2);
        }
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1.0, 8).is_err());
        assert!(Grid::new(1.0, 48).is_err());
        assert!(Grid::new(0.0, 16).is_err());
        assert!(Grid::new(f64::NAN, 16).is_err());
        let g = Grid::new(2.0, 64).unwrap();
        assert_eq!(g.spacing(), 4.0 / 64.0);
        assert_eq!(g.point(g.len() / 2 + 32), (0.0, 0.0));
    }

    #[test]
    fn window_is_one_in_core_and_zero_outside() {
        assert_eq!(window_profile(0.3, 1.0, 2.0), 1.0);
        assert_eq!(window_profile(2.5, 1.0, 2.0), 0.0);
        let mid = window_profile(1.5, 1.0, 2.0);
        assert!((mid - 0.5).abs() < 1e-12);
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = Grid::new(1.0, 16).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); g.len()];
        v[3].im = f64::INFINITY;
        assert!(matches!(Field::new(g, v), Err(Error::NonFinite(_))));
    }
}
