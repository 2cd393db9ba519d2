//! Descent on the unit `L²` sphere: ground states of the energy and the
//! scale-invariant quotient `𝓔_{β,0,0}[u] / ∫|u|⁴` whose infimum is the
//! critical coupling.
//!
//! Each iteration takes the tangent gradient `r = Hu − λu`, optionally smooths
//! it with `(α − Δ)⁻¹`, mixes in the previous direction (Polak–Ribière+),
//! and backtracks along the retraction `(u + t d)/‖u + t d‖` until the Armijo
//! condition holds.

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{self, Coupling, EnergyReport, Prepared};
use crate::error::{Error, Result};
use crate::solitons::{nll_state, PolyPair};
use crate::spectral::{io, Field, Grid, Spectral};

/// Energies below this are treated as a runaway collapse.
pub const DIVERGENCE_THRESHOLD: f64 = -1e6;

/// A state whose scale-covariant energy `𝓔_{β,γ,0}` is below `−COLLAPSE_MARGIN·𝓔_{β,0,0}`
/// proves the infimum is `−∞`: dilating it drives the energy down like `λ²`.
pub const COLLAPSE_MARGIN: f64 = 1e-3;

/// Relative size of energy differences treated as rounding noise by the line search.
const ROUNDING_SLACK: f64 = 1e-12;

/// Default relative density floor for [`count_vortices`].
pub const VORTEX_FLOOR: f64 = 1e-3;

/// Default multi-start seeds for [`minimize_quotient`].
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Starting state.
#[derive(Debug, Clone)]
pub enum Init {
    /// Centred real Gaussian `e^{−r²/(2w²)}`.
    Gaussian { width: f64 },
    /// Smooth random field: a random complex polynomial of degree 3 in `x/w, y/w`
    /// times a Gaussian envelope of width `w`.
    Random { seed: u64, width: f64 },
    Soliton(PolyPair),
    /// An `AFP1` field file on the working grid.
    File(PathBuf),
    Field(Field),
}

impl Init {
    fn build(&self, grid: &Grid) -> Result<Field> {
        let u = match self {
            Init::Gaussian { width } => {
                check_width(*width)?;
                let w2 = 2.0 * width * width;
                Field::from_fn(*grid, |x, y| Complex64::new((-(x * x + y * y) / w2).exp(), 0.0))
            }
            Init::Random { seed, width } => {
                check_width(*width)?;
                random_smooth_field(*grid, &mut ChaCha8Rng::seed_from_u64(*seed), *width)
            }
            Init::Soliton(pair) => nll_state(pair, grid),
            Init::File(path) => {
                let u = io::load_field(path)?;
                grid.check_same(u.grid())?;
                u
            }
            Init::Field(u) => {
                grid.check_same(u.grid())?;
                u.clone()
            }
        };
        if u.mass() == 0.0 {
            return Err(Error::InvalidArgument("initial state is zero".into()));
        }
        Ok(u.normalized())
    }
}

fn check_width(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("init width must be positive, got {w}")))
    }
}

/// Backtracking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub initial_step: f64,
    pub shrink: f64,
    /// Armijo constant `c₁`.
    pub sufficient_decrease: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self { initial_step: 0.5, shrink: 0.5, sufficient_decrease: 1e-4, min_step: 1e-12, max_step: 1e3 }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeConfig {
    pub init: Init,
    pub max_iter: usize,
    /// Stop once the tangent gradient norm drops below this.
    pub grad_tol: f64,
    pub line_search: LineSearch,
    /// Smooth the gradient with `(α − Δ)⁻¹`, `α = 1 + kinetic energy`.
    pub precondition: bool,
    /// Polak–Ribière+ momentum; off gives plain projected descent.
    pub conjugate: bool,
    /// Amplitude of a smooth random perturbation added to the initial state
    /// (relative to its sup norm); breaks the symmetry of a centred Gaussian.
    pub perturbation: f64,
    pub perturbation_seed: u64,
    /// Multi-start seeds for the quotient; each seed starts from `Init::Random`.
    pub seeds: Vec<u64>,
    /// Width of the random quotient starts; sets the scale the quotient is evaluated at.
    pub random_width: f64,
    pub vortex_floor: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            init: Init::Gaussian { width: 1.0 },
            max_iter: 2000,
            grad_tol: 1e-6,
            line_search: LineSearch::default(),
            precondition: true,
            conjugate: true,
            perturbation: 0.0,
            perturbation_seed: 0,
            seeds: DEFAULT_SEEDS.to_vec(),
            random_width: 0.5,
            vortex_floor: VORTEX_FLOOR,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        let ls = &self.line_search;
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be positive");
        }
        if !(ls.shrink > 0.0 && ls.shrink < 1.0) {
            return bad("shrink factor must lie in (0, 1)");
        }
        if !(ls.sufficient_decrease > 0.0 && ls.sufficient_decrease < 1.0) {
            return bad("sufficient-decrease constant must lie in (0, 1)");
        }
        if !(ls.initial_step > 0.0 && ls.min_step > 0.0 && ls.min_step <= ls.initial_step && ls.initial_step <= ls.max_step)
        {
            return bad("steps must satisfy 0 < min_step ≤ initial_step ≤ max_step");
        }
        if !(self.perturbation >= 0.0 && self.perturbation.is_finite()) {
            return bad("perturbation must be nonnegative");
        }
        if !(self.vortex_floor > 0.0) {
            return bad("vortex floor must be positive");
        }
        Ok(())
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub energy: f64,
    pub residual: f64,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub u: Field,
    pub report: EnergyReport,
    pub iterations: usize,
    pub converged: bool,
    pub energy_history: Vec<f64>,
    pub vortex_count: usize,
    pub log: Vec<IterationRecord>,
}

/// Outcome of one multi-start run of [`minimize_quotient`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub quotient: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct QuotientResult {
    /// Final quotient of the best start; an upper bound for the critical coupling.
    pub gamma_star_estimate: f64,
    pub u: Field,
    /// `𝓔_{β,0,0}` report of `u`.
    pub report: EnergyReport,
    pub best_seed: u64,
    pub converged: bool,
    pub vortex_count: usize,
    pub seeds: Vec<SeedOutcome>,
    pub log: Vec<IterationRecord>,
}

/// `Re⟨a, b⟩` without the `h²` weight.
fn re_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Removes the component of `v` along `u`.
fn project(u: &[Complex64], v: &mut [Complex64]) {
    let c = re_dot(u, v) / re_dot(u, u);
    v.iter_mut().zip(u).for_each(|(v, u)| *v -= c * u);
}

/// Orthonormal basis, in `Re⟨·,·⟩`, of `u` and the generators of its
/// dilations `u + x·∇u` and translations `∇u`.
fn symmetry_basis(sp: &Spectral, u: &Field) -> Vec<Vec<Complex64>> {
    let g = sp.grid();
    let [dx, dy] = sp.gradient_raw(u.values());
    let dilation: Vec<Complex64> = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let (x, y) = g.point(i);
            v + x * dx[i] + y * dy[i]
        })
        .collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for mut v in [u.values().to_vec(), dilation, dx, dy] {
        for b in &basis {
            let c = re_dot(b, &v);
            v.iter_mut().zip(b).for_each(|(v, b)| *v -= c * b);
        }
        let norm = re_dot(&v, &v).sqrt();
        // a translation generator vanishes for a centred radial state
        if norm > 1e-8 * (u.values().len() as f64).sqrt() {
            v.iter_mut().for_each(|v| *v /= norm);
            basis.push(v);
        }
    }
    basis
}

fn project_out(basis: &[Vec<Complex64>], v: &mut [Complex64]) {
    for b in basis {
        let c = re_dot(b, v);
        v.iter_mut().zip(b).for_each(|(v, b)| *v -= c * b);
    }
}

/// Smooth random field, normalized.
pub fn random_smooth_field<R: Rng + ?Sized>(grid: Grid, rng: &mut R, width: f64) -> Field {
    const DEGREE: usize = 3;
    let mut coeffs = Vec::new();
    for a in 0..=DEGREE {
        for b in 0..=DEGREE - a {
            // damp higher orders so the envelope stays in charge
            let damp = 1.0 / ((1..=a).product::<usize>() * (1..=b).product::<usize>()) as f64;
            coeffs.push((a, b, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * damp.sqrt()));
        }
    }
    let w2 = 2.0 * width * width;
    Field::from_fn(grid, |x, y| {
        let (sx, sy) = (x / width, y / width);
        let p: Complex64 = coeffs.iter().map(|(a, b, c)| c * sx.powi(*a as i32) * sy.powi(*b as i32)).sum();
        p * (-(x * x + y * y) / w2).exp()
    })
    .normalized()
}

/// What is being minimized.
enum Objective<'a> {
    Energy(&'a Coupling),
    Quotient(f64),
}

struct Evaluated {
    value: f64,
    /// Tangent gradient; the directional derivative along tangent `d` is `2h²Re⟨r, d⟩`.
    gradient: Vec<Complex64>,
    residual: f64,
    report: EnergyReport,
    /// Flat directions removed from every search direction, besides `u` itself.
    constraints: Vec<Vec<Complex64>>,
}

impl Objective<'_> {
    fn prepare(&self, sp: &Spectral, u: &Field) -> Result<Prepared> {
        match self {
            Objective::Energy(c) => Prepared::new(sp, u, c),
            Objective::Quotient(beta) => Prepared::new(sp, u, &Coupling::magnetic(*beta)),
        }
    }

    fn value(&self, p: &Prepared) -> Result<f64> {
        let t = p.terms()?;
        Ok(match self {
            Objective::Energy(_) => t.total(),
            Objective::Quotient(_) => t.kinetic_magnetic / t.l4norm,
        })
    }

    fn evaluate(&self, sp: &Spectral, u: &Field) -> Result<Evaluated> {
        self.evaluate_prepared(sp, u, &self.prepare(sp, u)?)
    }

    fn evaluate_prepared(&self, sp: &Spectral, u: &Field, p: &Prepared) -> Result<Evaluated> {
        match self {
            Objective::Energy(c) => {
                let (report, hu) = p.report_and_gradient(sp, c.gamma)?;
                let lambda = report.multiplier;
                let gradient: Vec<Complex64> =
                    hu.values().iter().zip(u.values()).map(|(h, u)| h - lambda * u).collect();
                let gradient = sp.drop_nyquist(&gradient);
                let h2 = sp.grid().spacing().powi(2);
                let residual = (h2 * re_dot(&gradient, &gradient)).sqrt();
                Ok(Evaluated { value: report.total, gradient, residual, report, constraints: Vec::new() })
            }
            Objective::Quotient(_) => {
                // dQ = (d𝓔 − Q d∫|u|⁴)/∫|u|⁴, and 𝓔 − Q∫|u|⁴ is the energy at γ = −Q.
                let q = self.value(p)?;
                let (shifted, hu) = p.report_and_gradient(sp, -q)?;
                let mu = shifted.multiplier;
                let gradient: Vec<Complex64> =
                    hu.values().iter().zip(u.values()).map(|(h, u)| (h - mu * u) / shifted.l4norm).collect();
                let mut gradient = sp.drop_nyquist(&gradient);
                // Dilations and translations are exact symmetries of the continuum quotient. On the
                // periodic box spreading lowers it spuriously, so those directions are frozen.
                let constraints = symmetry_basis(sp, u);
                project_out(&constraints, &mut gradient);
                let h2 = sp.grid().spacing().powi(2);
                let residual = (h2 * re_dot(&gradient, &gradient)).sqrt();
                let report = EnergyReport {
                    quartic: 0.0,
                    potential: 0.0,
                    total: shifted.kinetic_magnetic,
                    ..shifted
                };
                Ok(Evaluated { value: q, gradient, residual, report, constraints })
            }
        }
    }

    /// Errors if `u` certifies that the infimum is `−∞`.
    fn guard(&self, e: &Evaluated) -> Result<()> {
        let Objective::Energy(c) = self else { return Ok(()) };
        if e.value < DIVERGENCE_THRESHOLD {
            return Err(Error::UnstableCoupling(format!("energy {:.3e} below the divergence threshold", e.value)));
        }
        let r = &e.report;
        let covariant = r.kinetic_magnetic + r.quartic;
        if covariant < -COLLAPSE_MARGIN * r.kinetic_magnetic {
            // u_λ(x) = λu(λx) has energy λ²·covariant + ∫V(x/λ)|u|² → −∞.
            let lambda = (DIVERGENCE_THRESHOLD.abs() / covariant.abs()).sqrt();
            return Err(Error::UnstableCoupling(format!(
                "β={}, γ={}: kinetic + quartic = {covariant:.3e} < 0, so dilating the state by {lambda:.1} \
                 pushes the energy below {DIVERGENCE_THRESHOLD:.0e}",
                c.beta, c.gamma
            )));
        }
        Ok(())
    }
}

/// Rescales `u` to the target `∫|u|⁴` and recentres its density, both along
/// exactly flat directions of the quotient.
fn reanchor(sp: &Spectral, u: &Field, target_l4: f64) -> Field {
    let g = sp.grid();
    let rho = u.density();
    let mass = rho.mass();
    let h2 = g.spacing() * g.spacing();
    let (mut cx, mut cy) = (0.0, 0.0);
    for (i, r) in rho.values().iter().enumerate() {
        let (x, y) = g.point(i);
        cx += h2 * x * r;
        cy += h2 * y * r;
    }
    let (cx, cy) = (cx / mass, cy / mass);
    let mut v = if cx.hypot(cy) > 2.0 * g.spacing() { sp.translate(u, -cx, -cy) } else { u.clone() };
    let l4 = h2 * v.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
    let scale = (target_l4 / l4).sqrt();
    if (scale - 1.0).abs() > 0.05 {
        v = energy::dilate_unchecked(sp, &v, scale);
    }
    Field::from_parts(*g, sp.drop_nyquist(v.values())).normalized()
}

struct Run {
    u: Field,
    current: Evaluated,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
    log: Vec<IterationRecord>,
}

fn descend(sp: &Spectral, obj: &Objective, u0: Field, cfg: &MinimizeConfig, anchor_l4: Option<f64>) -> Result<Run> {
    let ls = cfg.line_search;
    let mut u = Field::from_parts(*sp.grid(), sp.drop_nyquist(u0.values())).normalized();
    let mut cur = obj.evaluate(sp, &u)?;
    obj.guard(&cur)?;
    let mut history = vec![cur.value];
    let mut log = vec![IterationRecord { iter: 0, energy: cur.value, residual: cur.residual, step: 0.0 }];
    let mut step = ls.initial_step;
    // (previous direction, previous preconditioned gradient, previous ⟨r, g⟩)
    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>, f64)> = None;
    let mut converged = cur.residual <= cfg.grad_tol;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iter {
        let r = &cur.gradient;
        let g = if cfg.precondition {
            let alpha = 1.0 + cur.report.kinetic_magnetic / cur.report.norm.max(f64::MIN_POSITIVE);
            sp.helmholtz_inverse(&Field::from_parts(*sp.grid(), r.clone()), alpha).into_values()
        } else {
            r.clone()
        };
        let mut g = sp.drop_nyquist(&g);
        project(u.values(), &mut g);
        project_out(&cur.constraints, &mut g);
        let rg = re_dot(r, &g);
        let mut d: Vec<Complex64> = g.iter().map(|v| -v).collect();
        if let (true, Some((dp, gp, rgp))) = (cfg.conjugate, prev.as_ref()) {
            let num = rg - re_dot(r, gp);
            let beta_cg = (num / rgp).max(0.0);
            if beta_cg > 0.0 {
                let mut dp = dp.clone();
                project(u.values(), &mut dp);
                project_out(&cur.constraints, &mut dp);
                d.iter_mut().zip(&dp).for_each(|(d, p)| *d += beta_cg * p);
                if re_dot(r, &d) >= 0.0 {
                    d = g.iter().map(|v| -v).collect();
                }
            }
        }
        let h2 = sp.grid().spacing().powi(2);
        let slope = 2.0 * h2 * re_dot(r, &d);
        if !(slope < 0.0) {
            break;
        }
        let f0 = cur.value;
        // below this the Armijo test only sees rounding
        let noise = ROUNDING_SLACK * f0.abs().max(1.0);
        let mut t = step;
        let accepted = loop {
            let trial = Field::from_parts(*sp.grid(), u.values().iter().zip(&d).map(|(u, d)| u + t * d).collect());
            let trial = trial.normalized();
            let prepared = obj.prepare(sp, &trial)?;
            let f = obj.value(&prepared)?;
            if f <= f0 + ls.sufficient_decrease * t * slope {
                break Some((trial, t, prepared, None));
            }
            if f <= f0 + noise && t * slope.abs() <= 1e3 * noise {
                // energy differences are unresolvable; a smaller gradient decides
                let e = obj.evaluate_prepared(sp, &trial, &prepared)?;
                if e.residual < cur.residual {
                    break Some((trial, t, prepared, Some(e)));
                }
            }
            // minimizer of the quadratic through f0, slope and f, kept in [t/10, shrink·t]
            let curvature = f - f0 - slope * t;
            let t_quad = if curvature > 0.0 { -slope * t * t / (2.0 * curvature) } else { ls.shrink * t };
            t = t_quad.clamp(0.1 * t, ls.shrink * t);
            if t < ls.min_step {
                break None;
            }
        };
        let Some((next, t, prepared, evaluated)) = accepted else {
            if prev.is_some() {
                // retry once from steepest descent
                prev = None;
                step = ls.initial_step;
                continue;
            }
            break;
        };
        iterations += 1;
        prev = Some((d, g, rg));
        u = next;
        let mut reuse = Some((prepared, evaluated));
        if let Some(target) = anchor_l4 {
            let l4 = h2 * u.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
            if (l4 / target - 1.0).abs() > 0.25 {
                u = reanchor(sp, &u, target);
                prev = None;
                reuse = None;
            }
        }
        cur = match reuse {
            Some((_, Some(e))) => e,
            Some((p, None)) => obj.evaluate_prepared(sp, &u, &p)?,
            None => obj.evaluate(sp, &u)?,
        };
        obj.guard(&cur)?;
        history.push(cur.value);
        log.push(IterationRecord { iter: iterations, energy: cur.value, residual: cur.residual, step: t });
        step = (t / ls.shrink).clamp(ls.min_step, ls.max_step);
        converged = cur.residual <= cfg.grad_tol;
    }
    Ok(Run { u, current: cur, iterations, converged, history, log })
}

/// Ground state of `𝓔_{β,γ,V}` on the unit sphere.
pub fn minimize_energy(sp: &Spectral, c: &Coupling, cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    cfg.validate()?;
    let mut u = cfg.init.build(sp.grid())?;
    if cfg.perturbation > 0.0 {
        let noise = random_smooth_field(
            *sp.grid(),
            &mut ChaCha8Rng::seed_from_u64(cfg.perturbation_seed),
            init_extent(&u),
        );
        let amp = cfg.perturbation * sup(&u) / sup(&noise);
        u = Field::from_parts(*sp.grid(), u.values().iter().zip(noise.values()).map(|(a, b)| a + amp * b).collect())
            .normalized();
    }
    let run = descend(sp, &Objective::Energy(c), u, cfg, None)?;
    let report = run.current.report;
    let vortex_count = count_vortices(&run.u, cfg.vortex_floor);
    Ok(MinimizeResult {
        u: run.u,
        report,
        iterations: run.iterations,
        converged: run.converged,
        energy_history: run.history,
        vortex_count,
        log: run.log,
    })
}

fn sup(u: &Field) -> f64 {
    u.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// RMS radius of `|u|²`.
fn init_extent(u: &Field) -> f64 {
    let g = u.grid();
    let (mut m, mut r2) = (0.0, 0.0);
    for (i, v) in u.values().iter().enumerate() {
        let (x, y) = g.point(i);
        m += v.norm_sqr();
        r2 += (x * x + y * y) * v.norm_sqr();
    }
    (r2 / m).sqrt().max(g.spacing())
}

/// Minimizes `𝓔_{β,0,0}[u] / ∫|u|⁴` from every seed in `cfg.seeds` and keeps the lowest.
///
/// The quotient is invariant under dilation and translation. On the periodic
/// box it is not: spreading towards the box size lowers it spuriously. The
/// descent therefore moves orthogonally to those generators, and whenever
/// `∫|u|⁴` still drifts by more than 25% from its starting value the state is
/// recentred and rescaled back. The starting width fixes the working scale and
/// should be small against the box (algebraically decaying minimizers at
/// `β > 0` lose mass `∼ (width/L)²` to the edge).
/// Seeds run concurrently; ties go to the earlier seed.
pub fn minimize_quotient(sp: &Spectral, beta: f64, cfg: &MinimizeConfig) -> Result<QuotientResult> {
    cfg.validate()?;
    if !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be finite, got {beta}")));
    }
    if cfg.seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let obj = Objective::Quotient(beta);
    let runs: Vec<Result<(u64, Run)>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let u0 = Init::Random { seed, width: cfg.random_width }.build(sp.grid())?;
            let h2 = sp.grid().spacing().powi(2);
            let target = h2 * u0.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>();
            let mut run = descend(sp, &obj, u0, cfg, Some(target))?;
            // report at the anchored scale, where the discretization is trusted
            let anchored = reanchor(sp, &run.u, target);
            let e = obj.evaluate(sp, &anchored)?;
            run.u = anchored;
            run.current = e;
            Ok((seed, run))
        })
        .collect();
    let mut outcomes = Vec::new();
    let mut best: Option<(u64, Run)> = None;
    for r in runs {
        let (seed, run) = r?;
        outcomes.push(SeedOutcome {
            seed,
            quotient: run.current.value,
            iterations: run.iterations,
            converged: run.converged,
        });
        if best.as_ref().is_none_or(|(_, b)| run.current.value < b.current.value) {
            best = Some((seed, run));
        }
    }
    let (best_seed, run) = best.expect("at least one seed");
    let vortex_count = count_vortices(&run.u, cfg.vortex_floor);
    Ok(QuotientResult {
        gamma_star_estimate: run.current.value,
        report: run.current.report,
        u: run.u,
        best_seed,
        converged: run.converged,
        vortex_count,
        seeds: outcomes,
        log: run.log,
    })
}

/// Signed phase change from `a` to `b`, in `(−π, π]`, antisymmetric in its arguments.
fn phase_step(a: Complex64, b: Complex64) -> f64 {
    let z = b * a.conj();
    // atan2 of a signed zero can return ±π; an exact zero carries no phase
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    z.im.atan2(z.re)
}

/// Total absolute phase winding of `u`.
///
/// Plaquettes whose four corners all exceed `floor·max|u|²` contribute their
/// own winding. Low-density plaquettes are grouped into connected holes; a
/// hole that does not touch the box edge contributes the winding around its
/// boundary, so vortices sitting exactly on a node (a symmetric centre, for
/// instance) are still counted. The low-density exterior is ignored.
pub fn count_vortices(u: &Field, floor: f64) -> usize {
    let n = u.grid().n();
    let v = u.values();
    let rho_max = v.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if rho_max == 0.0 || n < 2 {
        return 0;
    }
    let cut = floor * rho_max;
    let m = n - 1;
    let corners = |px: usize, py: usize| [py * n + px, py * n + px + 1, (py + 1) * n + px + 1, (py + 1) * n + px];
    let circulation = |px: usize, py: usize| {
        let c = corners(px, py);
        (0..4).map(|k| phase_step(v[c[k]], v[c[(k + 1) % 4]])).sum::<f64>()
    };
    let low: Vec<bool> = (0..m * m)
        .map(|p| corners(p % m, p / m).iter().any(|&i| v[i].norm_sqr() <= cut))
        .collect();
    let mut total = 0usize;
    for p in 0..m * m {
        if !low[p] {
            total += (circulation(p % m, p / m) / (2.0 * PI)).round().abs() as usize;
        }
    }
    let mut seen = vec![false; m * m];
    for start in 0..m * m {
        if !low[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let (mut sum, mut touches_edge) = (0.0, false);
        while let Some(p) = stack.pop() {
            let (px, py) = (p % m, p / m);
            sum += circulation(px, py);
            touches_edge |= px == 0 || py == 0 || px == m - 1 || py == m - 1;
            let mut push = |q: usize| {
                if low[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            };
            if px > 0 {
                push(p - 1);
            }
            if px + 1 < m {
                push(p + 1);
            }
            if py > 0 {
                push(p - m);
            }
            if py + 1 < m {
                push(p + m);
            }
        }
        if !touches_edge {
            total += (sum / (2.0 * PI)).round().abs() as usize;
        }
    }
    total
}
