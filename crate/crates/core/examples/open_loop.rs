//! Open-loop response to a cosine density perturbation: the speed
//! oscillations are not damped and grow over the horizon.

use acc_traffic::solver::{simulate, Mode, SolverOptions};
use acc_traffic::{equilibrium, Grid, ModelParams, TrafficState};

fn main() -> acc_traffic::Result<()> {
    let p = ModelParams::nominal();
    let eq = equilibrium(&p)?;
    let grid = Grid::nominal(&p);
    // 10 veh/km, four periods over the stretch
    let init = TrafficState::cosine(
        &grid,
        &p,
        &eq,
        0.01,
        8.0 * std::f64::consts::PI / p.length(),
    );

    let traj = simulate(
        &p,
        &grid,
        &init,
        Mode::OpenLoop,
        &SolverOptions::default(),
        10,
    )?;

    println!(
        "{:>8} {:>14} {:>14}",
        "t [s]", "sup|v-v_bar|", "sup|rho-rho_bar|"
    );
    for t in (0..=350).step_by(50) {
        let s = &traj.states[traj.index_at(t as f64)];
        let sup_rho = s
            .rho
            .iter()
            .map(|r| (r - eq.rho_bar).abs())
            .fold(0.0, f64::max);
        println!(
            "{:>8} {:>14.6} {:>14.6e}",
            t,
            s.speed_deviation_sup(&eq),
            sup_rho
        );
    }
    println!("max CFL number: {:.4}", traj.max_cfl());
    Ok(())
}
