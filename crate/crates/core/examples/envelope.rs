//! C1-norm of the linearised closed-loop deviations against the
//! exp(-k t / 2) envelope.
//!
//! The feedback acts on the speed only. The density part of the Riemann
//! variable is transported downstream at v_bar and leaves the stretch after
//! about D / v_bar seconds, so the fitted rate is far below k / 2 on the
//! nominal horizon.

use acc_traffic::analysis::decay_envelope;
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

    let traj = simulate_linear(
        &lc,
        &grid,
        &rho0,
        &v0,
        LinearMode::ClosedLoop { gain: k },
        10,
    )?;
    let env = decay_envelope(&traj, k, 5.0, (5.0, 200.0));
    for t in [0.0, 5.0, 50.0, 100.0, 200.0, 322.0, 350.0] {
        let i = env
            .times
            .iter()
            .position(|&s| s >= t)
            .unwrap_or(env.times.len() - 1);
        println!("t = {:>5} s  C1 norm = {:.4e}", env.times[i], env.norms[i]);
    }
    println!(
        "fitted rate on [5, 200] s: {:.5} 1/s (k/2 = {:.3})",
        env.fitted_rate,
        k / 2.0
    );
    println!("transit time D / v_bar: {:.1} s", p.length() / eq.v_bar);
    Ok(())
}
