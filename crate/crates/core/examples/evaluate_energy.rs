//! Energy terms, Euler–Lagrange residual and the Bogomolnyi defect of a
//! Gaussian and of the versiera at a few couplings.
//!
//! cargo run --release --example evaluate_energy

use std::f64::consts::PI;

use afp::energy::{self, Coupling, Potential};
use afp::solitons::{self, PolyPair};
use afp::spectral::{Field, Grid, Spectral};
use num_complex::Complex64;

fn main() -> afp::Result<()> {
    let g = Grid::new(16.0, 256)?;
    let sp = Spectral::new(g);
    let gaussian = Field::from_fn(g, |x, y| Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0)).normalized();
    let versiera = solitons::nll_state(&PolyPair::versiera(), &g).normalized();

    println!("{:<10} {:>6} {:>8} {:>10} {:>10} {:>10} {:>10}", "state", "beta", "gamma", "energy", "kinetic", "defect", "residual");
    for (name, u) in [("gaussian", &gaussian), ("versiera", &versiera)] {
        for (beta, gamma) in [(0.0, 0.0), (1.0, 2.0), (2.0, 0.0), (2.0, -4.0 * PI)] {
            let r = energy::evaluate(&sp, u, &Coupling::new(beta, gamma, Potential::Zero))?;
            println!(
                "{name:<10} {beta:>6.2} {gamma:>8.3} {:>10.6} {:>10.6} {:>10.2e} {:>10.2e}",
                r.total, r.kinetic_magnetic, r.bogomolnyi_defect, r.el_residual
            );
        }
    }

    // the gradient agrees with a finite difference along a random direction
    let dir = afp::minimize::random_smooth_field(g, &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3), 1.0);
    let (fd, analytic) =
        energy::directional_derivative_check(&sp, &gaussian, &dir, &Coupling::new(1.0, 2.0, Potential::Harmonic), 1e-5)?;
    println!("directional derivative: finite difference {fd:.8}, analytic {analytic:.8}");
    Ok(())
}
