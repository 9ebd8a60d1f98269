//! CSV trajectories, plot data and run manifests. Every file is written to
//! a temporary sibling first and renamed into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{char_speeds, ModelParams};
use crate::solver::Trajectory;
use crate::state::{Grid, TrafficState};

pub const TRAJECTORY_HEADER: &str = "t,x,rho,v,h_acc,lambda1,lambda2";

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Trajectory CSV text: one row per (sample, node), time-major, keeping
/// every `stride`-th sample. Floats use 17 significant digits.
pub fn trajectory_csv(traj: &Trajectory, p: &ModelParams, stride: usize) -> String {
    let stride = stride.max(1);
    let mut out = String::with_capacity(64 * traj.len() * traj.grid.nodes() / stride + 64);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (state, control) in traj.states.iter().zip(&traj.controls).step_by(stride) {
        for j in 0..state.len() {
            let (l1, l2) = char_speeds(state.rho[j], state.v[j], control.h_acc[j], p);
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                state.t, state.x[j], state.rho[j], state.v[j], control.h_acc[j], l1, l2
            );
        }
    }
    out
}

pub fn export_trajectory(
    traj: &Trajectory,
    p: &ModelParams,
    path: &Path,
    stride: usize,
) -> Result<()> {
    write_atomic(path, trajectory_csv(traj, p, stride).as_bytes())
}

/// One parsed row of a trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub rho: f64,
    pub v: f64,
    pub h_acc: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_fields(path: &Path, line_no: usize, line: &str, expected: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expected {
        return Err(parse_error(
            path,
            line_no,
            format!("expected {expected} columns, found {}", fields.len()),
        ));
    }
    fields
        .iter()
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| parse_error(path, line_no, format!("`{f}` is not a number")))
        })
        .collect()
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRAJECTORY_HEADER => {}
        _ => {
            return Err(parse_error(
                path,
                1,
                format!("header must be `{TRAJECTORY_HEADER}`"),
            ))
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let f = parse_fields(path, i + 2, l, 7)?;
            Ok(TrajectoryRow {
                t: f[0],
                x: f[1],
                rho: f[2],
                v: f[3],
                h_acc: f[4],
                lambda1: f[5],
                lambda2: f[6],
            })
        })
        .collect()
}

/// Initial state from a CSV with header `x,rho,v`, or from the first time
/// slice of a trajectory CSV.
pub fn read_initial_csv(path: &Path) -> Result<TrafficState> {
    let text = std::fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or("").trim();
    let (x, rho, v): (Vec<f64>, Vec<f64>, Vec<f64>) = if header == TRAJECTORY_HEADER {
        let rows = read_trajectory_csv(path)?;
        let t0 = rows
            .first()
            .map(|r| r.t)
            .ok_or_else(|| parse_error(path, 2, "no data rows"))?;
        let first: Vec<_> = rows.iter().take_while(|r| r.t == t0).collect();
        (
            first.iter().map(|r| r.x).collect(),
            first.iter().map(|r| r.rho).collect(),
            first.iter().map(|r| r.v).collect(),
        )
    } else if header == "x,rho,v" {
        let mut cols = (Vec::new(), Vec::new(), Vec::new());
        for (i, l) in text.lines().enumerate().skip(1) {
            if l.trim().is_empty() {
                continue;
            }
            let f = parse_fields(path, i + 1, l, 3)?;
            cols.0.push(f[0]);
            cols.1.push(f[1]);
            cols.2.push(f[2]);
        }
        cols
    } else {
        return Err(parse_error(
            path,
            1,
            format!("header must be `x,rho,v` or `{TRAJECTORY_HEADER}`"),
        ));
    };
    Ok(TrafficState { t: 0.0, x, rho, v })
}

/// Plot data kinds. Surfaces are `x,t,value` triples; the time series holds
/// the sup-norms of the deviations from equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    DensitySurface,
    SpeedSurface,
    ControlField,
    Timeseries,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::DensitySurface,
        PlotKind::SpeedSurface,
        PlotKind::ControlField,
        PlotKind::Timeseries,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::DensitySurface => "density-surface",
            PlotKind::SpeedSurface => "speed-surface",
            PlotKind::ControlField => "control-field",
            PlotKind::Timeseries => "timeseries",
        }
    }

    pub fn header(self) -> &'static str {
        match self {
            PlotKind::DensitySurface => "x,t,rho",
            PlotKind::SpeedSurface => "x,t,v",
            PlotKind::ControlField => "x,t,h_acc",
            PlotKind::Timeseries => "t,sup_rho_dev,sup_v_dev",
        }
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownPlotKind(s.to_string()))
    }
}

/// Plot data text for `kind`, keeping every `stride`-th sample.
pub fn plot_data(
    traj: &Trajectory,
    p: &ModelParams,
    kind: PlotKind,
    stride: usize,
) -> Result<String> {
    let mut out = String::new();
    out.push_str(kind.header());
    out.push('\n');
    let stride = stride.max(1);
    let samples = traj.states.iter().zip(&traj.controls).step_by(stride);
    if kind == PlotKind::Timeseries {
        let eq = crate::model::equilibrium(p)?;
        for (s, _) in samples {
            let sup_rho = s
                .rho
                .iter()
                .map(|r| (r - eq.rho_bar).abs())
                .fold(0.0, f64::max);
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                s.t,
                sup_rho,
                s.speed_deviation_sup(&eq)
            );
        }
        return Ok(out);
    }
    for (s, c) in samples {
        let values = match kind {
            PlotKind::DensitySurface => &s.rho,
            PlotKind::SpeedSurface => &s.v,
            _ => &c.h_acc,
        };
        for (x, value) in s.x.iter().zip(values) {
            let _ = writeln!(out, "{x:.16e},{:.16e},{value:.16e}", s.t);
        }
    }
    Ok(out)
}

pub fn emit_plot_data(
    traj: &Trajectory,
    p: &ModelParams,
    kind: PlotKind,
    path: &Path,
    stride: usize,
) -> Result<()> {
    write_atomic(path, plot_data(traj, p, kind, stride)?.as_bytes())
}

/// `t,value` pairs, for norms and functionals taken from reports.
pub fn emit_series(path: &Path, header: &str, t: &[f64], values: &[f64]) -> Result<()> {
    let mut out = format!("{header}\n");
    for (t, v) in t.iter().zip(values) {
        let _ = writeln!(out, "{t:.16e},{v:.16e}");
    }
    write_atomic(path, out.as_bytes())
}

/// Written next to the artifacts of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub scenario_hash: String,
    pub version: String,
    pub grid: Grid,
    pub elapsed_s: f64,
    pub artifacts: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(
        command: &str,
        scenario_hash: &str,
        grid: Grid,
        elapsed_s: f64,
        artifacts: Vec<PathBuf>,
    ) -> Self {
        Manifest {
            command: command.to_string(),
            scenario_hash: scenario_hash.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            grid,
            elapsed_s,
            artifacts,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_kind_names_round_trip() {
        for k in PlotKind::ALL {
            assert_eq!(k.name().parse::<PlotKind>().unwrap(), k);
        }
        assert!(matches!(
            "heatmap".parse::<PlotKind>(),
            Err(Error::UnknownPlotKind(s)) if s == "heatmap"
        ));
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
