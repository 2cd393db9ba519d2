//! Radial ground state `τ` of `−Δτ + τ − τ³ = 0` in the plane (the Townes soliton).
//!
//! `τ(0)` is found by shooting: too large a start value sends `τ` through zero,
//! too small a value turns it back up before it reaches zero. Bisection between
//! the two behaviours pins `τ(0)` to rounding level, after which the profile is
//! continued by its linearized tail `C r^{−1/2} e^{−r}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Output mesh spacing in `r`.
const DR: f64 = 0.01;
/// Series start of the integration.
const EPS: f64 = 1e-6;
/// The profile is stored on `[0, R_MAX]`.
const R_MAX: f64 = 40.0;
/// Shots are abandoned past this radius.
const R_SHOOT: f64 = 40.0;

#[derive(Debug, Clone)]
pub struct TownesProfile {
    /// Uniform mesh `r_k = k·DR`.
    pub r: Vec<f64>,
    pub tau: Vec<f64>,
    pub dtau: Vec<f64>,
    /// `τ(0)`.
    pub u0: f64,
    /// `∫_{ℝ²} τ²`.
    pub l2sq: f64,
    /// `l2sq / 2`, the optimal Ladyzhenskaya–Gagliardo–Nirenberg constant.
    pub c_lgn: f64,
    /// `C` in `τ ≈ C r^{−1/2} e^{−r}`.
    pub tail_constant: f64,
    /// Radius beyond which the fitted tail replaces the integrated profile.
    pub matching_radius: f64,
}

type State = [f64; 2];

fn rhs(r: f64, s: State) -> State {
    [s[1], s[0] - s[0].powi(3) - s[1] / r]
}

/// One Dormand–Prince 5(4) step; returns the fifth-order solution and an error estimate.
fn dp_step(r: f64, s: State, h: f64) -> (State, f64) {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0; 2]; 7];
    k[0] = rhs(r, s);
    for stage in 0..6 {
        let mut y = s;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            y[0] += h * A[stage][j] * kj[0];
            y[1] += h * A[stage][j] * kj[1];
        }
        k[stage + 1] = rhs(r + C[stage] * h, y);
    }
    let mut y5 = s;
    let mut err: f64 = 0.0;
    for c in 0..2 {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for j in 0..7 {
            d5 += B5[j] * k[j][c];
            d4 += B4[j] * k[j][c];
        }
        y5[c] += h * d5;
        // relative control: the tail decays exponentially and must stay accurate there
        err = err.max((h * (d5 - d4)).abs() / (y5[c].abs().max(s[c].abs()) + 1e-300));
    }
    (y5, err)
}

/// Adaptive integration from `r0` to `r1`.
fn integrate(r0: f64, r1: f64, mut s: State, tol: f64) -> State {
    let mut r = r0;
    let mut h = (r1 - r0).min(DR);
    while r < r1 {
        h = h.min(r1 - r);
        let (next, err) = dp_step(r, s, h);
        if err <= tol || h < 1e-12 {
            r += h;
            s = next;
            let grow = if err == 0.0 { 4.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0) };
            h *= grow;
        } else {
            h *= (0.9 * (tol / err).powf(0.25)).clamp(0.1, 0.9);
        }
    }
    s
}

fn series_start(a: f64) -> State {
    let c = (a - a * a * a) / 4.0;
    [a + c * EPS * EPS, 2.0 * c * EPS]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// `τ` crosses zero: start value too large.
    Over,
    /// `τ′` turns positive while `τ > 0`: start value too small.
    Under,
    /// Neither before `R_SHOOT`.
    Undecided,
}

struct Trajectory {
    tau: Vec<f64>,
    dtau: Vec<f64>,
    outcome: Shot,
    /// Mesh index at which the outcome was decided.
    stop: usize,
}

fn shoot(a: f64, tol: f64, keep: bool) -> Trajectory {
    let steps = (R_SHOOT / DR).round() as usize;
    let mut s = integrate(EPS, DR, series_start(a), tol);
    let mut tau = Vec::new();
    let mut dtau = Vec::new();
    if keep {
        tau.extend([a, s[0]]);
        dtau.extend([0.0, s[1]]);
    }
    for k in 1..steps {
        let r = k as f64 * DR;
        s = integrate(r, r + DR, s, tol);
        if keep {
            tau.push(s[0]);
            dtau.push(s[1]);
        }
        if s[0] < 0.0 {
            return Trajectory { tau, dtau, outcome: Shot::Over, stop: k + 1 };
        }
        if s[1] > 0.0 {
            return Trajectory { tau, dtau, outcome: Shot::Under, stop: k + 1 };
        }
    }
    Trajectory { tau, dtau, outcome: Shot::Undecided, stop: steps }
}

/// `r^{−1/2} e^{−r}` with the first two corrections of the `K₀` expansion.
fn tail_shape(r: f64) -> f64 {
    r.powf(-0.5) * (-r).exp() * (1.0 - 1.0 / (8.0 * r) + 9.0 / (128.0 * r * r))
}

fn tail_shape_derivative(r: f64) -> f64 {
    let t = 1.0 - 1.0 / (8.0 * r) + 9.0 / (128.0 * r * r);
    let dt = 1.0 / (8.0 * r * r) - 18.0 / (128.0 * r * r * r);
    let base = r.powf(-0.5) * (-r).exp();
    base * (dt - t * (1.0 + 0.5 / r))
}

/// Solves for the Townes profile; `tolerance` bounds the local integration error per step.
pub fn townes_profile(tolerance: f64) -> Result<TownesProfile> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tolerance}")));
    }
    let tol = tolerance.min(1e-6);
    // coarse scan for a sign change of the shooting outcome
    let mut bracket = None;
    let mut prev = (1.0, shoot(1.0, tol, false).outcome);
    for k in 1..=30 {
        let a = 1.0 + 0.1 * k as f64;
        let o = shoot(a, tol, false).outcome;
        if prev.1 == Shot::Under && o == Shot::Over {
            bracket = Some((prev.0, a));
            break;
        }
        prev = (a, o);
    }
    let (mut lo, mut hi) =
        bracket.ok_or_else(|| Error::Bracketing("no sign change of the shooting outcome on [1, 4]".into()))?;
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(mid, tol, false).outcome {
            Shot::Over => hi = mid,
            Shot::Under => lo = mid,
            Shot::Undecided => {
                return Err(Error::Bracketing(format!("undecided shot at τ(0) = {mid}")));
            }
        }
    }
    let below = shoot(lo, tol, true);
    let above = shoot(hi, tol, false);
    // The two shots agree until they separate; match the tail well before that.
    let split = below.stop.min(above.stop);
    let mut m = split.saturating_sub((6.0 / DR) as usize);
    // stay in the linear regime but well above rounding
    while m > 1 && below.tau[m] < 1e-7 {
        m -= 1;
    }
    let matching_radius = m as f64 * DR;
    if matching_radius < 8.0 {
        return Err(Error::Bracketing(format!(
            "shots separate too early (r = {matching_radius}) to fit the tail"
        )));
    }
    let tail_constant = below.tau[m] / tail_shape(matching_radius);

    let total = (R_MAX / DR).round() as usize + 1;
    let mut r = Vec::with_capacity(total);
    let mut tau = Vec::with_capacity(total);
    let mut dtau = Vec::with_capacity(total);
    for k in 0..total {
        let rk = k as f64 * DR;
        r.push(rk);
        if k <= m {
            tau.push(below.tau[k]);
            dtau.push(below.dtau[k]);
        } else {
            tau.push(tail_constant * tail_shape(rk));
            dtau.push(tail_constant * tail_shape_derivative(rk));
        }
    }

    // ∫ τ² d²x = 2π ∫ τ² r dr by Simpson's rule (total − 1 is even).
    let f: Vec<f64> = r.iter().zip(&tau).map(|(r, t)| t * t * r).collect();
    let mut s = f[0] + f[total - 1];
    for (k, v) in f.iter().enumerate().take(total - 1).skip(1) {
        s += v * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    let l2sq = 2.0 * PI * s * DR / 3.0;
    Ok(TownesProfile {
        r,
        tau,
        dtau,
        u0: lo,
        l2sq,
        c_lgn: l2sq / 2.0,
        tail_constant,
        matching_radius,
    })
}

impl TownesProfile {
    /// `τ(r)` by cubic Hermite interpolation of the mesh values and slopes; the fitted tail beyond the mesh.
    pub fn eval(&self, radius: f64) -> f64 {
        let r = radius.abs();
        let last = self.r.len() - 1;
        if r >= self.r[last] {
            return self.tail_constant * tail_shape(r);
        }
        let k = ((r / DR).floor() as usize).min(last - 1);
        let t = (r - self.r[k]) / DR;
        let (p0, p1) = (self.tau[k], self.tau[k + 1]);
        let (m0, m1) = (self.dtau[k] * DR, self.dtau[k + 1] * DR);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1
    }

    /// Samples `τ(|x|)` on a grid.
    pub fn sample(&self, grid: &Grid) -> Field {
        Field::from_fn(*grid, |x, y| Complex64::new(self.eval(x.hypot(y)), 0.0))
    }

    /// Largest `|τ″ + τ′/r − τ + τ³|` over interior mesh points, with `τ″`
    /// from the fourth-order central difference of `τ′`.
    pub fn ode_residual(&self) -> f64 {
        let n = self.r.len();
        let mut worst: f64 = 0.0;
        for k in 2..n - 2 {
            let d = &self.dtau;
            let tau2 = (-d[k + 2] + 8.0 * d[k + 1] - 8.0 * d[k - 1] + d[k - 2]) / (12.0 * DR);
            let t = self.tau[k];
            let res = tau2 + d[k] / self.r[k] - t + t * t * t;
            worst = worst.max(res.abs());
        }
        worst
    }
}
