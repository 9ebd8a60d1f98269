//! Lyapunov decay certificate along the linearised closed loop, and the
//! same functional along the open loop for contrast.

use acc_traffic::analysis::{certify_decay, lyapunov_gains, TOL_DISCR};
use acc_traffic::solver::{simulate_linear, LinearMode};
use acc_traffic::{equilibrium, linear_coeffs, Grid, ModelParams, TrafficState};

fn main() -> acc_traffic::Result<()> {
    let p = ModelParams::nominal();
    let eq = equilibrium(&p)?;
    let lc = linear_coeffs(&p, &eq);
    let grid = Grid::nominal(&p);
    let k = 0.25;
    let init = TrafficState::cosine(
        &grid,
        &p,
        &eq,
        0.01,
        8.0 * std::f64::consts::PI / p.length(),
    );
    let (rho0, v0) = init.deviations(&eq);

    let g = lyapunov_gains(&lc, k);
    println!(
        "k1 = {:.4e}  k2 = {:.4e}  k3 = {:.4}  k4 = {:.4}",
        g.k1, g.k2, g.k3, g.k4
    );
    println!(
        "c6 = {:.4e}  c7 = {:.4e}  c8 = {:.4e}  c9 = {:.4e}",
        g.c6, g.c7, g.c8, g.c9
    );
    println!("(weights exceed f64 range; V is reported as ln V)");
    println!();

    for (label, mode) in [
        ("closed", LinearMode::ClosedLoop { gain: k }),
        ("open", LinearMode::OpenLoop),
    ] {
        let traj = simulate_linear(&lc, &grid, &rho0, &v0, mode, 1)?;
        let r = certify_decay(&traj, &lc, &g, 1, k, TOL_DISCR);
        let first = r.samples.first().unwrap().ln();
        let last = r.samples.last().unwrap().ln();
        println!(
            "{label:>6}: ln V(T) - ln V(0) = {:+.3}, stepwise violations {}, cumulative {}, certificate {}",
            last - first,
            r.decay_violations,
            r.cumulative_violations,
            if r.passed() { "holds" } else { "violated" }
        );
    }
    Ok(())
}
