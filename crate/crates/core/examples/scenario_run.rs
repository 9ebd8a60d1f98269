//! Scenario-driven run: load a TOML scenario, simulate both modes, and
//! write trajectories, plot data, metrics and a manifest.
//!
//! cargo run --example scenario_run -- [scenario.toml] [out-dir]

use std::path::PathBuf;

use acc_traffic::cli::{load_scenario, run};

fn main() -> acc_traffic::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario = match args.next() {
        Some(path) => load_scenario(&PathBuf::from(path))?,
        None => load_scenario(&PathBuf::from(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/examples/scenarios/short_horizon.toml"
        )))?,
    };
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("acc-traffic-run"));

    println!("scenario hash {}", scenario.hash);
    println!(
        "grid: {} cells, dx = {} m, dt = {} s, T = {} s",
        scenario.grid.cells, scenario.grid.dx, scenario.grid.dt, scenario.grid.horizon
    );
    let artifacts = run(&scenario, &out)?;
    for path in artifacts.trajectories.iter().chain(&artifacts.plots) {
        println!("wrote {}", path.display());
    }
    if let Some(path) = &artifacts.metrics_report {
        println!("wrote {}", path.display());
    }
    println!("manifest {}", artifacts.manifest.display());
    Ok(())
}
