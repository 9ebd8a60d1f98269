//! Scenario files, experiment pipelines and artifact export used by the
//! `acc-traffic` binary.

pub mod export;
pub mod run;
pub mod scenario;
pub mod units;

pub use export::{
    emit_plot_data, export_trajectory, read_trajectory_csv, trajectory_csv, Manifest, PlotKind,
    TRAJECTORY_HEADER,
};
pub use run::{
    analyze, analyze_scenario, compare, metrics, reproduce, run, seed_check, simulate_scenario,
    AnalysisReport, Certificate, InvariantReport, RunArtifacts,
};
pub use scenario::{load_scenario, parse_scenario, ControlMode, InitialCondition, Scenario};
