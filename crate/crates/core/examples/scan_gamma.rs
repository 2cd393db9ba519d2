//! Critical coupling over a range of β, with the lower floors and the
//! empirical Lipschitz constant of the curve.
//!
//! cargo run --release --example scan_gamma

use afp::minimize::MinimizeConfig;
use afp::spectral::{Grid, Spectral};
use afp::stability::{self, Stability};

fn main() -> afp::Result<()> {
    let sp = Spectral::new(Grid::new(16.0, 128)?);
    let cfg = MinimizeConfig { seeds: vec![1, 2], max_iter: 400, random_width: 0.5, ..Default::default() };
    let betas = [0.0, 0.5, 1.0, 2.0];
    let scan = stability::scan_gamma_star(&sp, &betas, &cfg)?;
    scan.write_csv(std::io::stdout().lock())?;
    println!("\nLipschitz estimate {:.4}", scan.lipschitz_estimate);

    // what the estimate says about a few attractive couplings at β = 1
    let gs = scan.points[2].gamma_star_estimate;
    for gamma in [-0.5 * gs, -gs, -1.5 * gs] {
        let s = match stability::classify(1.0, gamma, gs) {
            Stability::Stable => "stable",
            Stability::Critical => "critical",
            Stability::Unstable => "unstable",
        };
        println!("β = 1, γ = {gamma:>8.4}: {s}");
    }
    Ok(())
}
