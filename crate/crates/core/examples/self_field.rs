//! Self-generated vector potential of a Gaussian density: the curl law
//! `curl A = 2πρ` and the shell-theorem closed form.
//!
//! cargo run --release --example self_field

use std::f64::consts::PI;

use afp::selfmag;
use afp::spectral::{self, DensityField, Grid, Spectral, VectorField};

fn main() -> afp::Result<()> {
    let g = Grid::new(12.0, 256)?;
    let sp = Spectral::new(g);
    let rho = DensityField::from_fn(g, |x, y| (-(x * x + y * y)).exp() / PI);
    let sf = selfmag::self_potential(&sp, &rho)?;

    let inner = g.half_width() / 2.0;
    let curl = sp.windowed_curl(&sf.a, inner, 0.95 * g.half_width());
    let target: Vec<f64> = rho.values().iter().map(|r| 2.0 * PI * r).collect();
    let curl_err = spectral::relative_l2_error(curl.values(), &target, |i| {
        let (x, y) = g.point(i);
        x * x + y * y < inner * inner
    });
    let closed = VectorField::from_fn(g, |x, y| {
        let r2 = x * x + y * y;
        if r2 == 0.0 {
            return (0.0, 0.0);
        }
        let f = (1.0 - (-r2).exp()) / r2;
        (-y * f, x * f)
    });
    let shell_err = spectral::relative_l2_error_vec(&sf.a, &closed, |_| true);

    println!("mass {:.12}, fraction outside r = L/2 {:.2e}", sf.total_mass, sf.outside_core_fraction);
    println!("curl A = 2πρ on the core: relative error {curl_err:.2e}");
    println!("A = x⊥(1 − e^(−r²))/r²:     relative error {shell_err:.2e}");
    println!("\n{:>6} {:>14} {:>14}", "r", "|A| computed", "|A| exact");
    for i in (g.n() / 2..g.n()).step_by(16) {
        let k = (g.n() / 2) * g.n() + i;
        let r = g.coord(i);
        println!("{r:>6.2} {:>14.10} {:>14.10}", sf.a.magnitude(k), closed.magnitude(k));
    }
    Ok(())
}
