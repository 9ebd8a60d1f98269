//! Closed loop with the time-gap feedback law: speed oscillations decay and
//! the commanded ACC time gap stays within its admissible band.

use acc_traffic::solver::{simulate, Mode, SolverOptions};
use acc_traffic::{equilibrium, ControlGain, Grid, ModelParams, TrafficState};

fn main() -> acc_traffic::Result<()> {
    let p = ModelParams::nominal();
    let eq = equilibrium(&p)?;
    let grid = Grid::nominal(&p);
    let init = TrafficState::cosine(
        &grid,
        &p,
        &eq,
        0.01,
        8.0 * std::f64::consts::PI / p.length(),
    );
    let gain = ControlGain::new(0.25)?;

    let traj = simulate(
        &p,
        &grid,
        &init,
        Mode::ClosedLoop(gain),
        &SolverOptions::default(),
        10,
    )?;

    let v0 = init.speed_deviation_sup(&eq);
    for t in [0.0, 10.0, 50.0, 100.0, 350.0] {
        let i = traj.index_at(t);
        let sup = traj.states[i].speed_deviation_sup(&eq);
        let (lo, hi) = traj.controls[i].range();
        println!(
            "t = {:>5} s  sup|v-v_bar| = {:.3e} ({:.4} % of initial)  h_acc in [{:.3}, {:.3}] s",
            t,
            sup,
            100.0 * sup / v0,
            lo,
            hi
        );
    }
    let (lo, hi) = traj.control_range();
    let saturated = traj
        .diagnostics
        .iter()
        .filter(|d| d.saturation > 0.0)
        .count();
    println!("h_acc over the run: [{lo:.4}, {hi:.4}] s; {saturated} steps with saturated nodes");
    Ok(())
}
