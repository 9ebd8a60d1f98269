mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use acc_traffic::cli::export::{plot_data, read_initial_csv};
use acc_traffic::cli::{
    load_scenario, parse_scenario, read_trajectory_csv, run, trajectory_csv, ControlMode, PlotKind,
    Scenario, TRAJECTORY_HEADER,
};
use acc_traffic::{simulate, Mode, SolverOptions};
use common::nominal;

fn scenario_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples/scenarios")
        .join(name)
}

fn short() -> Scenario {
    load_scenario(&scenario_file("short_horizon.toml")).unwrap()
}

#[test]
fn bundled_scenarios_parse() {
    let nominal_file = load_scenario(&scenario_file("nominal.toml")).unwrap();
    let builtin = Scenario::nominal();
    assert_eq!(nominal_file.params, builtin.params);
    assert_eq!(nominal_file.grid, builtin.grid);
    assert_eq!(nominal_file.gain, builtin.gain);
    let s = short();
    assert_eq!(s.grid.horizon, 120.0);
    assert_eq!(s.gain.value(), 0.5);
    assert_eq!(s.output.stride, 50);
    assert_eq!(
        s.output.plots,
        vec![PlotKind::Timeseries, PlotKind::ControlField]
    );
}

#[test]
fn trajectory_csv_round_trip() {
    let s = short()
        .with_overrides(Some(ControlMode::Closed), None)
        .unwrap();
    let traj = simulate(
        &s.params,
        &s.grid,
        &s.initial_state().unwrap(),
        s.modes()[0],
        &s.solver,
        1,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let stride = 7;
    std::fs::write(&path, trajectory_csv(&traj, &s.params, stride)).unwrap();
    let rows = read_trajectory_csv(&path).unwrap();
    let nodes = s.grid.nodes();
    assert_eq!(rows.len(), traj.len().div_ceil(stride) * nodes);
    for (chunk, n) in rows.chunks(nodes).zip((0..traj.len()).step_by(stride)) {
        let state = &traj.states[n];
        for (j, row) in chunk.iter().enumerate() {
            assert_eq!(row.t, traj.times[n]);
            assert_eq!(row.rho, state.rho[j]);
            assert_eq!(row.v, state.v[j]);
            assert_eq!(row.h_acc, traj.controls[n].h_acc[j]);
        }
    }
    let restart = read_initial_csv(&path).unwrap();
    assert_eq!(restart.rho, traj.states[0].rho);
    assert_eq!(restart.v, traj.states[0].v);
}

#[test]
fn empty_trajectory_gives_header_only_plot() {
    let n = nominal();
    let init = common::cosine(&n, &n.grid, common::AMPLITUDE);
    let mut traj = simulate(
        &n.p,
        &n.grid.with_horizon(1.0).unwrap(),
        &init,
        Mode::OpenLoop,
        &SolverOptions::default(),
        1,
    )
    .unwrap();
    traj.times.clear();
    traj.states.clear();
    traj.controls.clear();
    for kind in PlotKind::ALL {
        let text = plot_data(&traj, &n.p, kind, 1).unwrap();
        assert_eq!(text.trim_end(), kind.header());
    }
    assert_eq!(trajectory_csv(&traj, &n.p, 1).trim_end(), TRAJECTORY_HEADER);
}

#[test]
fn runs_are_deterministic_and_complete() {
    let s = short();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run(&s, a.path()).unwrap();
    run(&s, b.path()).unwrap();
    assert_eq!(first.trajectories.len(), 2);
    assert_eq!(first.plots.len(), 4);
    assert!(first.metrics_report.is_some());
    assert!(first.manifest.exists());
    for path in first.trajectories.iter().chain(&first.plots) {
        let name = path.file_name().unwrap();
        let x = std::fs::read(path).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name:?} differs between runs");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&first.manifest).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["scenario_hash"], s.hash.as_str());
}

fn read_numeric(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn closed_loop_plot_data() {
    let s = short();
    let dir = tempfile::tempdir().unwrap();
    run(&s, dir.path()).unwrap();
    let control = read_numeric(&dir.path().join("plot_closed_control-field.csv"));
    let h = control.iter().map(|r| *r.last().unwrap());
    assert!(h
        .clone()
        .all(|h| (s.params.h_min() - 1e-12..=s.params.h_max() + 1e-12).contains(&h)));
    let series = read_numeric(&dir.path().join("plot_closed_timeseries.csv"));
    let first = series.first().unwrap()[2];
    let last = series.last().unwrap()[2];
    assert!(last < 0.1 * first, "sup |v dev| {first} -> {last}");
}

#[test]
fn invalid_scenarios_report_line() {
    let err = parse_scenario("[grid]\ndx = \"10 parsecs\"\n", Path::new("bad.toml")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("bad.toml"), "{err}");
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_acc-traffic"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[params]\nbogus = 1\n").unwrap();
    let status = binary()
        .args(["simulate", "--scenario"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("o1"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let out = binary()
        .args(["simulate", "--scenario"])
        .arg(scenario_file("short_horizon.toml"))
        .arg("--out")
        .arg(dir.path().join("o2"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let artifacts: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(artifacts["manifest"]
        .as_str()
        .unwrap()
        .ends_with("manifest.json"));
}

/// The nominal analysis carries the failing C1-envelope certificate, which
/// the binary reports with the certificate exit code.
#[test]
fn analyze_nominal_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = binary()
        .args(["analyze", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("lyapunov-closed-loop") && stderr.contains("PASS"),
        "{stderr}"
    );
    assert!(dir.path().join("analysis.json").exists());
    assert_eq!(out.status.code(), Some(4), "{stderr}");
}
