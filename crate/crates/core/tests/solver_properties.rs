mod common;

use acc_traffic::controller::ControlGain;
use acc_traffic::solver::{simulate_linear, LinearMode};
use acc_traffic::{simulate, Grid, Mode, SolverOptions, TrafficState};
use common::{cosine, nominal, AMPLITUDE};

fn closed() -> Mode {
    Mode::ClosedLoop(ControlGain::new(0.25).unwrap())
}

#[test]
fn mass_balance_on_nominal_runs() {
    let n = nominal();
    let init = cosine(&n, &n.grid, AMPLITUDE);
    for mode in [Mode::OpenLoop, closed()] {
        let traj = simulate(
            &n.p,
            &n.grid,
            &init,
            mode,
            &SolverOptions::default(),
            usize::MAX,
        )
        .unwrap();
        assert_eq!(traj.diagnostics.len(), n.grid.steps());
        let worst = traj
            .diagnostics
            .windows(2)
            .map(|w| {
                ((w[1].mass - w[0].mass) - n.grid.dt * (w[0].inflow - w[0].outflow)).abs()
                    / w[0].mass
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{}: {worst:e}", mode.label());
    }
}

#[test]
fn equilibrium_is_preserved_for_ten_thousand_steps() {
    let n = nominal();
    let grid = n.grid.with_horizon(1000.0).unwrap();
    assert_eq!(grid.steps(), 10_000);
    let flat = TrafficState::at_equilibrium(&grid, &n.eq);
    for mode in [Mode::OpenLoop, closed()] {
        let traj = simulate(&n.p, &grid, &flat, mode, &SolverOptions::default(), 1000).unwrap();
        for s in &traj.states {
            for j in 0..grid.nodes() {
                assert!((s.rho[j] - n.eq.rho_bar).abs() <= 1e-10 * n.eq.rho_bar);
                assert!((s.v[j] - n.eq.v_bar).abs() <= 1e-10 * n.eq.v_bar);
            }
        }
    }
}

#[test]
fn recording_stride_keeps_initial_and_final() {
    let n = nominal();
    let grid = n.grid.with_horizon(10.0).unwrap();
    let init = cosine(&n, &grid, AMPLITUDE);
    let traj = simulate(
        &n.p,
        &grid,
        &init,
        Mode::OpenLoop,
        &SolverOptions::default(),
        25,
    )
    .unwrap();
    assert_eq!(traj.times, vec![0.0, 2.5, 5.0, 7.5, 10.0]);
    assert_eq!(traj.states[0].rho, init.rho);
}

#[test]
fn closed_loop_respects_time_gap_bounds() {
    let n = nominal();
    let init = cosine(&n, &n.grid, AMPLITUDE);
    let traj = simulate(
        &n.p,
        &n.grid,
        &init,
        closed(),
        &SolverOptions::default(),
        10,
    )
    .unwrap();
    let (lo, hi) = traj.control_range();
    assert!(
        lo >= n.p.h_min() - 1e-12 && hi <= n.p.h_max() + 1e-12,
        "[{lo}, {hi}]"
    );
    assert!(traj.max_cfl() <= 0.9);
}

fn speed_at_coarse_nodes(dx: f64, dt: f64, coarse_dx: f64) -> Vec<f64> {
    let n = nominal();
    let grid = Grid::new(n.p.length(), dx, dt, 50.0).unwrap();
    let init = cosine(&n, &grid, AMPLITUDE);
    let traj = simulate(
        &n.p,
        &grid,
        &init,
        Mode::OpenLoop,
        &SolverOptions::default(),
        grid.steps(),
    )
    .unwrap();
    let last = traj.states.last().unwrap();
    assert!((last.t - 50.0).abs() < 1e-9);
    let stride = (coarse_dx / dx).round() as usize;
    last.v.iter().step_by(stride).copied().collect()
}

/// Observed order of the nonlinear scheme against a fine reference, with
/// `dt / dx` held fixed.
#[test]
fn self_convergence_is_first_order() {
    let reference = speed_at_coarse_nodes(0.625, 0.00625, 10.0);
    let rms = |a: &[f64]| {
        (a.iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / a.len() as f64)
            .sqrt()
    };
    let errors: Vec<f64> = [(10.0, 0.1), (5.0, 0.05), (2.5, 0.025)]
        .iter()
        .map(|&(dx, dt)| rms(&speed_at_coarse_nodes(dx, dt, 10.0)))
        .collect();
    let order = (errors[1] / errors[2]).log2();
    assert!(order >= 0.8, "errors {errors:?}, order {order}");
    assert!(errors[0] > errors[1] && errors[1] > errors[2]);
}

/// For small perturbations the nonlinear deviations approach the linear
/// scheme, with a quadratic remainder.
#[test]
fn small_amplitude_matches_linear_scheme() {
    let n = nominal();
    let grid = n.grid.with_horizon(100.0).unwrap();
    let remainder = |eps: f64| {
        let init = cosine(&n, &grid, eps);
        let (rho0, v0) = init.deviations(&n.eq);
        let nl = simulate(
            &n.p,
            &grid,
            &init,
            Mode::OpenLoop,
            &SolverOptions::default(),
            100,
        )
        .unwrap();
        let lin = simulate_linear(&n.lc, &grid, &rho0, &v0, LinearMode::OpenLoop, 100).unwrap();
        let mut err: f64 = 0.0;
        for (s, v_lin) in nl.states.iter().zip(&lin.v) {
            let (_, v_dev) = s.deviations(&n.eq);
            for (a, b) in v_dev.iter().zip(v_lin) {
                err = err.max((a - b).abs());
            }
        }
        err / eps
    };
    let (r1, r2) = (remainder(1e-4), remainder(1e-5));
    assert!(r1 < 1e-1, "{r1}");
    let ratio = r1 / r2;
    assert!((5.0..20.0).contains(&ratio), "remainders {r1:e}, {r2:e}");
}

#[test]
fn off_grid_initial_state_rejected() {
    let n = nominal();
    let coarse = Grid::new(n.p.length(), 20.0, 0.1, 1.0).unwrap();
    let init = TrafficState::at_equilibrium(&coarse, &n.eq);
    assert!(simulate(
        &n.p,
        &n.grid,
        &init,
        Mode::OpenLoop,
        &SolverOptions::default(),
        1
    )
    .is_err());
}
