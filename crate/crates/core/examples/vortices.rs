//! Vortex counting on exact states and on a rotating-trap ground state.
//!
//! cargo run --release --example vortices

use afp::energy::{Coupling, Potential};
use afp::minimize::{count_vortices, minimize_energy, Init, MinimizeConfig, VORTEX_FLOOR};
use afp::solitons::{self, PolyPair};
use afp::spectral::{Grid, Spectral};

fn main() -> afp::Result<()> {
    let g = Grid::new(8.0, 128)?;
    for n in 1..=4 {
        let u = solitons::nll_state(&PolyPair::vortex_ring(n), &g);
        println!("ring (z^{n}, 1): vortex count {}", count_vortices(&u, VORTEX_FLOOR));
    }
    let pair = PolyPair::parse("-1,0,1", "1")?;
    let u = solitons::nll_state(&pair, &g);
    println!("(z² − 1, 1): vortex count {}", count_vortices(&u, VORTEX_FLOOR));

    // a trapped state at moderate β already nucleates vortices
    let sp = Spectral::new(Grid::new(8.0, 128)?);
    let cfg = MinimizeConfig { init: Init::Gaussian { width: 1.2 }, max_iter: 400, grad_tol: 1e-4, perturbation: 0.3, ..Default::default() };
    let r = minimize_energy(&sp, &Coupling::new(4.0, 0.0, Potential::Harmonic), &cfg)?;
    println!("β = 4, γ = 0 harmonic ground state: energy {:.5}, vortex count {}", r.report.total, r.vortex_count);
    Ok(())
}
