//! Fuel, comfort and travel-time indices for open vs closed loop. The two
//! simulations run on separate threads.

use acc_traffic::metrics::{compare, FuelCoeffs};
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
    let opts = SolverOptions::default();
    let closed_mode = Mode::ClosedLoop(ControlGain::new(0.25)?);

    let (open, closed) = std::thread::scope(|s| {
        let open = s.spawn(|| simulate(&p, &grid, &init, Mode::OpenLoop, &opts, 1));
        let closed = s.spawn(|| simulate(&p, &grid, &init, closed_mode, &opts, 1));
        (open.join().unwrap(), closed.join().unwrap())
    });
    let report = compare(&open?, &closed?, &FuelCoeffs::default())?;

    println!(
        "{:<10} {:>14} {:>14} {:>12}",
        "index", "open", "closed", "improv. %"
    );
    for (name, o, c, i) in [
        (
            "fuel",
            report.open.fuel1,
            report.closed.fuel1,
            report.improvement_pct.fuel1,
        ),
        (
            "comfort",
            report.open.comfort,
            report.closed.comfort,
            report.improvement_pct.comfort,
        ),
        (
            "TTT",
            report.open.ttt,
            report.closed.ttt,
            report.improvement_pct.ttt,
        ),
    ] {
        println!("{name:<10} {o:>14.4} {c:>14.4} {i:>12.2}");
    }
    Ok(())
}
