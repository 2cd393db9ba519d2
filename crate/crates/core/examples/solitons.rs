//! Exact zero-energy solitons from polynomial pairs: energy at the self-dual
//! coupling, Liouville residual, vortex positions and an SU(2) orbit check.
//!
//! cargo run --release --example solitons

use afp::energy::{self, Coupling};
use afp::minimize::{count_vortices, VORTEX_FLOOR};
use afp::solitons::{self, PolyPair};
use afp::spectral::{Grid, Spectral};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> afp::Result<()> {
    let g = Grid::new(16.0, 512)?;
    let sp = Spectral::new(g);
    let pairs = [
        ("versiera (z, 1)", PolyPair::versiera()),
        ("ring (z³, 1)", PolyPair::vortex_ring(3)),
        ("(z² − 1, 2z)", PolyPair::parse("-1,0,1", "0,2")?),
        ("(z³ + 1, z − 2)", PolyPair::parse("1,0,0,1", "-2,1")?),
    ];
    println!("{:<18} {:>5} {:>12} {:>10} {:>10} {:>8}  roots of f", "pair", "beta", "E self-dual", "mass", "Liouville", "vortices");
    for (name, pair) in &pairs {
        let beta = pair.beta();
        let u = solitons::nll_state(pair, &g);
        let r = energy::evaluate(&sp, &u, &Coupling::self_dual(beta))?;
        let f = solitons::wronskian(pair)?;
        let psi = solitons::nll_superpotential(pair, &g);
        let res = solitons::liouville_residual(&sp, &psi, &f)?;
        let roots: Vec<String> = f.roots().iter().map(|z| format!("{:.3}{:+.3}i", z.re, z.im)).collect();
        println!(
            "{name:<18} {beta:>5} {:>12.2e} {:>10.6} {res:>10.2e} {:>8}  [{}]",
            r.total,
            r.norm,
            count_vortices(&u, VORTEX_FLOOR),
            roots.join(", ")
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pair = solitons::random_pair(&mut rng, 3, 1.5);
    let moved = pair.transform(solitons::random_su2(&mut rng))?;
    println!(
        "\nrandom n = 3 pair: P = {}, Q = {}\nSU(2) image gives the same state: {}",
        pair.p(),
        pair.q(),
        solitons::gauge_orbit_test(&pair, &moved, &g)
    );
    Ok(())
}
