//! Critical coupling from the quotient of magnetic kinetic energy and
//! `∫|u|⁴`, minimized from several random starts.
//!
//! cargo run --release --example critical_coupling [-- <beta> <half_width> <n>]

use std::f64::consts::PI;

use afp::minimize::{minimize_quotient, MinimizeConfig};
use afp::spectral::{Grid, Spectral};
use afp::stability;

fn main() -> afp::Result<()> {
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().map_or(2.0, |s| s.parse().expect("beta"));
    let half_width: f64 = args.next().map_or(16.0, |s| s.parse().expect("half width"));
    let n: usize = args.next().map_or(128, |s| s.parse().expect("n"));

    let sp = Spectral::new(Grid::new(half_width, n)?);
    let cfg = MinimizeConfig { seeds: vec![1, 2, 3], max_iter: 600, random_width: 0.5, ..Default::default() };
    let r = minimize_quotient(&sp, beta, &cfg)?;
    for s in &r.seeds {
        println!("seed {}  quotient {:.6}  iterations {}  converged {}", s.seed, s.quotient, s.iterations, s.converged);
    }
    println!("\nestimate {:.6} from seed {}, {} vortices", r.gamma_star_estimate, r.best_seed, r.vortex_count);
    println!("Bogomolnyi floor 2πβ = {:.6}, LGN floor = {:.6}", 2.0 * PI * beta, stability::lgn_constant()?);
    if let Some(exact) = stability::exact_gamma_star(beta) {
        println!("exact value {exact:.6}, relative error {:.2e}", (r.gamma_star_estimate - exact).abs() / exact);
    }
    Ok(())
}
