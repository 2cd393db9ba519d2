//! Radial Townes profile by shooting, and the sharp Ladyzhenskaya–Gagliardo–Nirenberg constant.
//!
//! cargo run --release --example townes

use std::f64::consts::PI;

use afp::solitons::townes_profile;

fn main() -> afp::Result<()> {
    let t = townes_profile(1e-12)?;
    println!("τ(0)           {:.10}", t.u0);
    println!("∫τ²            {:.10}", t.l2sq);
    println!("C_LGN          {:.10} = {:.6}·2π", t.c_lgn, t.c_lgn / (2.0 * PI));
    println!("tail constant  {:.6}  (τ ≈ C r^(−1/2) e^(−r))", t.tail_constant);
    println!("ODE residual   {:.2e}", t.ode_residual());
    println!("\n{:>5} {:>14}", "r", "τ(r)");
    for r in [0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0] {
        println!("{r:>5.1} {:>14.10}", t.eval(r));
    }
    Ok(())
}
