//! Uniform congested equilibrium and the coefficients of the linearised
//! system for the nominal stretch.

use acc_traffic::model::{equilibrium, mixed_time_constant, mixed_time_gap};
use acc_traffic::{linear_coeffs, ModelParams};

fn main() -> acc_traffic::Result<()> {
    let p = ModelParams::nominal();
    let eq = equilibrium(&p)?;

    println!(
        "inflow            {:.4} veh/s ({:.0} veh/h)",
        p.q_in(),
        p.q_in() * 3600.0
    );
    println!("ACC penetration   {:.0} %", 100.0 * p.penetration());
    println!("h_min / h_max     {:.4} / {:.2} s", p.h_min(), p.h_max());
    println!();
    println!("rho_bar           {:.4} veh/km", eq.rho_bar * 1000.0);
    println!("v_bar             {:.4} km/h", eq.v_bar * 3.6);
    println!(
        "h_mix_bar         {:.5} s",
        mixed_time_gap(eq.h_acc_bar, &p)?
    );
    println!("tau_mix           {:.5} s", mixed_time_constant(&p));

    let lc = linear_coeffs(&p, &eq);
    println!();
    println!("c1 = {:.5}  c2 = {:.5}  c3 = {:.5}", lc.c1, lc.c2, lc.c3);
    println!("c4 = {:.5}  c5 = {:.5}", lc.c4, lc.c5);
    println!("a1 = {:.4e}  a2 = {:.4}", lc.a1, lc.a2);
    Ok(())
}
