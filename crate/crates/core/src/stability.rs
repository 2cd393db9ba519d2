//! Critical-coupling scans, membership in the nonlinear Landau level,
//! Thomas–Fermi lower bounds and stability classification.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{self, Coupling, Potential};
use crate::error::{Error, Result};
use crate::minimize::{self, MinimizeConfig};
use crate::solitons::townes_profile;
use crate::spectral::{Field, Spectral};

/// Relative width of the band around `−γ̂*` classified as critical.
pub const CRITICAL_MARGIN: f64 = 0.02;

/// Slack allowed below the floors `2π|β|` and `C_LGN` when checking a scan point.
pub const FLOOR_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub beta: f64,
    pub gamma_star_estimate: f64,
    /// `2π|β|`.
    pub bogomolnyi_floor: f64,
    /// `C_LGN`, the critical coupling at `β = 0`.
    pub lgn_floor: f64,
    pub vortex_count: usize,
    pub converged: bool,
    /// Quotient after each accepted step of the best start.
    pub quotient_history: Vec<f64>,
    /// Set when the minimization for this `β` failed; the other fields are then NaN or zero.
    pub error: Option<String>,
}

impl ScanPoint {
    /// `γ̂* ≥ max(2π|β|, C_LGN) − tol·(max + 1)`.
    pub fn respects_floors(&self, tol: f64) -> bool {
        let floor = self.bogomolnyi_floor.max(self.lgn_floor);
        self.gamma_star_estimate >= floor - tol * (floor + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub points: Vec<ScanPoint>,
    /// `max |γ̂*(β₁) − γ̂*(β₂)| / |β₁ − β₂|` over adjacent successful points.
    pub lipschitz_estimate: f64,
}

impl Scan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "beta,gamma_star_estimate,bogomolnyi_floor,lgn_floor,vortex_count,converged")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                p.beta, p.gamma_star_estimate, p.bogomolnyi_floor, p.lgn_floor, p.vortex_count, p.converged
            )?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// `C_LGN` from the Townes profile.
pub fn lgn_constant() -> Result<f64> {
    Ok(townes_profile(1e-10)?.c_lgn)
}

/// `γ̂*(β)` for every `β` by multi-start quotient minimization.
///
/// A failing point is recorded with its error and the scan carries on.
pub fn scan_gamma_star(sp: &Spectral, betas: &[f64], cfg: &MinimizeConfig) -> Result<Scan> {
    if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(Error::InvalidArgument("scan betas must be finite and nonnegative".into()));
    }
    if betas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("scan betas must be sorted".into()));
    }
    cfg.validate()?;
    let lgn_floor = lgn_constant()?;
    let points: Vec<ScanPoint> = betas
        .par_iter()
        .map(|&beta| {
            let bogomolnyi_floor = 2.0 * PI * beta;
            match minimize::minimize_quotient(sp, beta, cfg) {
                Ok(q) => ScanPoint {
                    beta,
                    gamma_star_estimate: q.gamma_star_estimate,
                    bogomolnyi_floor,
                    lgn_floor,
                    vortex_count: q.vortex_count,
                    converged: q.converged,
                    quotient_history: q.log.iter().map(|r| r.energy).collect(),
                    error: None,
                },
                Err(e) => ScanPoint {
                    beta,
                    gamma_star_estimate: f64::NAN,
                    bogomolnyi_floor,
                    lgn_floor,
                    vortex_count: 0,
                    converged: false,
                    quotient_history: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let lipschitz_estimate = lipschitz_estimate(&points);
    Ok(Scan { points, lipschitz_estimate })
}

fn lipschitz_estimate(points: &[ScanPoint]) -> f64 {
    let ok: Vec<&ScanPoint> = points.iter().filter(|p| p.error.is_none()).collect();
    ok.windows(2)
        .filter(|w| w[1].beta > w[0].beta)
        .map(|w| (w[1].gamma_star_estimate - w[0].gamma_star_estimate).abs() / (w[1].beta - w[0].beta))
        .fold(0.0, f64::max)
}

/// `2π|β|` where it is known to be exact (`|β| ≥ 2`).
pub fn exact_gamma_star(beta: f64) -> Option<f64> {
    (beta.abs() >= 2.0).then(|| 2.0 * PI * beta.abs())
}

/// Whether `u` saturates the Bogomolnyi bound to relative accuracy `tol` and has unit mass.
pub fn nll_membership(sp: &Spectral, u: &Field, beta: f64, tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("membership tolerance must be positive".into()));
    }
    let t = energy::evaluate_terms(sp, u, &Coupling::magnetic(beta))?;
    let defect = t.kinetic_magnetic - 2.0 * PI * beta.abs() * t.l4norm;
    Ok(defect.abs() <= tol * t.kinetic_magnetic && (t.norm - 1.0).abs() <= tol)
}

/// Minimum of `∫ gϱ² + Vϱ` over probability densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TFComparator {
    pub g_effective: f64,
    pub trap: String,
    pub energy: f64,
    /// Support radius; infinite for the untrapped problem.
    pub radius: f64,
    /// Chemical potential `μ` in `2gϱ + V = μ` on the support.
    pub multiplier: f64,
}

/// Closed-form Thomas–Fermi minimum.
///
/// For `V = r²` the minimizer is `ϱ = (μ − r²)₊/(2g)`; unit mass gives
/// `μ = 2√(g/π)`, support radius `√μ` and energy `πμ³/(6g) = (4/3)√(g/π)`.
/// Without a trap the infimum is 0, approached by spreading.
pub fn tf_minimum(g: f64, trap: &Potential) -> Result<TFComparator> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::InvalidArgument(format!("TF coupling must be positive, got {g}")));
    }
    match trap {
        Potential::Harmonic => {
            let mu = 2.0 * (g / PI).sqrt();
            Ok(TFComparator {
                g_effective: g,
                trap: trap.label().into(),
                energy: 4.0 / 3.0 * (g / PI).sqrt(),
                radius: mu.sqrt(),
                multiplier: mu,
            })
        }
        Potential::Zero => Ok(TFComparator {
            g_effective: g,
            trap: trap.label().into(),
            energy: 0.0,
            radius: f64::INFINITY,
            multiplier: 0.0,
        }),
        Potential::Sampled(_) => {
            Err(Error::UnsupportedTrap("closed forms exist only for the harmonic and zero traps".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Critical,
    Unstable,
}

/// Classification with the default margin `2%·γ̂* + 1e-6`.
pub fn classify(beta: f64, gamma: f64, gamma_star: f64) -> Stability {
    classify_with_margin(beta, gamma, gamma_star, CRITICAL_MARGIN)
}

/// Stable above `−γ̂* + margin`, unstable below `−γ̂* − margin`, critical in between.
///
/// `β` enters only through `γ̂*`; it is kept in the signature so callers pass
/// the point they are classifying.
pub fn classify_with_margin(_beta: f64, gamma: f64, gamma_star: f64, relative_margin: f64) -> Stability {
    let margin = relative_margin * gamma_star.abs() + 1e-6;
    let offset = gamma + gamma_star;
    if offset.abs() <= margin {
        Stability::Critical
    } else if offset > 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solitons::{nll_state, PolyPair};
    use crate::spectral::Grid;

    /// Energy of the trial density `A(R² − r²)₊` at unit mass, by radial Simpson quadrature.
    fn trial_energy(g: f64, radius: f64) -> f64 {
        let a = 2.0 / (PI * radius.powi(4));
        let m = 2000;
        let h = radius / m as f64;
        let f = |r: f64| {
            let rho = a * (radius * radius - r * r);
            2.0 * PI * r * (g * rho * rho + r * r * rho)
        };
        let mut s = f(0.0) + f(radius);
        for k in 1..m {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        s * h / 3.0
    }

    fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-10 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let x = 0.5 * (a + b);
        (x, f(x))
    }

    #[test]
    fn tf_closed_form_matches_a_numerical_minimization() {
        for g in [0.3, 4.0, 40.0 * PI, 200.0] {
            let tf = tf_minimum(g, &Potential::Harmonic).unwrap();
            let (r, e) = golden_section(|r| trial_energy(g, r), 0.05, 20.0);
            assert!((e - tf.energy).abs() < 1e-8 * tf.energy, "g={g}: {e} vs {}", tf.energy);
            assert!((r - tf.radius).abs() < 1e-4, "g={g}: {r} vs {}", tf.radius);
        }
        let tf = tf_minimum(40.0 * PI, &Potential::Harmonic).unwrap();
        assert!((tf.energy - 4.0 / 3.0 * 40f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tf_limits_and_errors() {
        assert!(tf_minimum(1e-12, &Potential::Harmonic).unwrap().energy < 1e-6);
        assert_eq!(tf_minimum(3.0, &Potential::Zero).unwrap().energy, 0.0);
        assert!(tf_minimum(0.0, &Potential::Harmonic).is_err());
        let g = Grid::new(4.0, 16).unwrap();
        let v = Potential::Sampled(crate::spectral::DensityField::zeros(g));
        assert!(matches!(tf_minimum(1.0, &v), Err(Error::UnsupportedTrap(_))));
    }

    #[test]
    fn classification() {
        assert_eq!(classify(10.0, 20.0 * PI, 20.0 * PI), Stability::Stable);
        assert_eq!(classify(100.0, -186.0 * PI, 200.0 * PI), Stability::Stable);
        assert_eq!(classify(4.0, -8.0 * PI, 8.0 * PI), Stability::Critical);
        assert_eq!(classify(4.0, -9.0 * PI, 8.0 * PI), Stability::Unstable);
        assert_eq!(classify(0.0, 0.0, 0.0), Stability::Critical);
        assert_eq!(exact_gamma_star(-3.0), Some(6.0 * PI));
        assert_eq!(exact_gamma_star(1.0), None);
    }

    #[test]
    fn membership_of_solitons_and_gaussians() {
        let g = Grid::new(32.0, 512).unwrap();
        let sp = Spectral::new(g);
        let v = nll_state(&PolyPair::versiera(), &g);
        assert!(nll_membership(&sp, &v, 2.0, 1e-3).unwrap());
        let gauss = Field::from_fn(g, |x, y| num_complex::Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0))
            .normalized();
        assert!(!nll_membership(&sp, &gauss, 2.0, 1e-3).unwrap());
        assert!(nll_membership(&sp, &v, 2.0, 0.0).is_err());
    }

    #[test]
    fn lipschitz_skips_failures() {
        let p = |beta: f64, q: f64, error: Option<String>| ScanPoint {
            beta,
            gamma_star_estimate: q,
            bogomolnyi_floor: 2.0 * PI * beta,
            lgn_floor: 5.85,
            vortex_count: 0,
            converged: true,
            quotient_history: vec![],
            error,
        };
        let pts = vec![p(0.0, 5.85, None), p(1.0, f64::NAN, Some("x".into())), p(2.0, 4.0 * PI, None)];
        assert!((lipschitz_estimate(&pts) - (4.0 * PI - 5.85) / 2.0).abs() < 1e-12);
        assert!(pts[0].respects_floors(FLOOR_TOLERANCE));
        assert!(!p(3.0, 5.0 * PI, None).respects_floors(FLOOR_TOLERANCE));
    }

    #[test]
    fn scan_output_formats() {
        let scan = Scan { points: vec![], lipschitz_estimate: 0.0 };
        let mut csv = Vec::new();
        scan.write_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "beta,gamma_star_estimate,bogomolnyi_floor,lgn_floor,vortex_count,converged\n"
        );
    }
}
