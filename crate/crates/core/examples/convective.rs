//! Convective stability of the closed-loop speed subsystem: a pulse entering
//! at x1 is attenuated by exp(-k (x1 - x2) / c4) by the time it reaches x2.

use acc_traffic::analysis::{convective_gain, empirical_convective_check, gaussian_pulse, PNorm};
use acc_traffic::{equilibrium, linear_coeffs, ModelParams};

fn main() -> acc_traffic::Result<()> {
    let p = ModelParams::nominal();
    let lc = linear_coeffs(&p, &equilibrium(&p)?);
    let (k, dx, x1) = (0.25, 10.0, 900.0);
    // unit Courant number: the upwind update is an exact shift
    let dt = dx / lc.c4;
    let pulse = gaussian_pulse(0.5, 60.0, 10.0, dt, 200);

    for x2 in [400.0, 650.0, 880.0] {
        println!(
            "x2 = {x2} m, predicted gain {:.4e}",
            convective_gain(x1, x2, k, lc.c4)?
        );
        for norm in [PNorm::One, PNorm::Two, PNorm::Inf] {
            let c = empirical_convective_check(&pulse, dt, dx, x1, x2, k, lc.c4, norm)?;
            println!(
                "  {:>4}: measured {:.4e}  ratio to prediction {:.6}  gradient norms {:.3e} -> {:.3e}",
                norm.label(),
                c.measured_ratio,
                c.agreement(),
                c.gradient_input_norm,
                c.gradient_output_norm
            );
        }
    }
    Ok(())
}
