//! Ground state in the harmonic trap at β = 10, γ = 20π, compared with the
//! Keller–Lieb–Thirring lower bound. Takes a couple of minutes on one core.
//!
//! cargo run --release --example harmonic_ground_state [-- <n> <max_iter>]

use std::f64::consts::PI;

use afp::energy::{Coupling, Potential};
use afp::minimize::{minimize_energy, Init, MinimizeConfig};
use afp::spectral::{Grid, Spectral};
use afp::stability;

fn main() -> afp::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(256, |s| s.parse().expect("n"));
    let max_iter: usize = args.next().map_or(600, |s| s.parse().expect("max_iter"));
    let (beta, gamma) = (10.0, 20.0 * PI);

    let sp = Spectral::new(Grid::new(12.0, n)?);
    let tf = stability::tf_minimum(2.0 * PI * beta + gamma, &Potential::Harmonic)?;
    let cfg = MinimizeConfig {
        init: Init::Gaussian { width: tf.radius / 6f64.sqrt() },
        max_iter,
        grad_tol: 1e-4,
        perturbation: 0.3,
        ..Default::default()
    };
    let r = minimize_energy(&sp, &Coupling::new(beta, gamma, Potential::Harmonic), &cfg)?;
    for rec in r.log.iter().step_by(50) {
        println!("iter {:>5}  energy {:.6}  residual {:.2e}", rec.iter, rec.energy, rec.residual);
    }
    println!("\n{}", afp::cli::report_line(&r.report));
    println!("{} vortices, converged {}", r.vortex_count, r.converged);
    println!("KLT lower bound {:.5}, Thomas–Fermi radius {:.3}", tf.energy, tf.radius);
    Ok(())
}
