//! Real unstable root of the open-loop characteristic function, with a
//! coarse scan of the function around it.

use acc_traffic::analysis::{characteristic_fn, find_unstable_root};
use acc_traffic::{equilibrium, linear_coeffs, ModelParams};

fn main() -> acc_traffic::Result<()> {
    let p = ModelParams::nominal();
    let lc = linear_coeffs(&p, &equilibrium(&p)?);
    let root = find_unstable_root(&lc, p.length())?;

    println!("sigma*    = {:.10e} 1/s", root.sigma_star);
    println!(
        "bracket   = ({:.3e}, {:.3e})",
        root.bracket.0, root.bracket.1
    );
    println!(
        "|f(sigma*)| = {:.3e} (relative {:.3e})",
        root.residual, root.relative_residual
    );
    println!("bisection iterations: {}", root.iterations);
    println!(
        "e-folding time of the unstable mode: {:.3e} s",
        1.0 / root.sigma_star
    );
    println!();
    for scale in [0.0, 0.5, 0.9, 1.0, 1.1, 2.0, 10.0] {
        let s = scale * root.sigma_star;
        println!(
            "f({:>4} sigma*) = {:+.4e}",
            scale,
            characteristic_fn(s, &lc, p.length())
        );
    }
    Ok(())
}
