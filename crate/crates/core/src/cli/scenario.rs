//! Scenario files: a TOML document with optional sections, unit-tagged
//! values, and defaults equal to the nominal configuration.
//!
//! ```toml
//! [params]
//! q_in = "1200 veh/h"
//! length = "1 km"
//! penetration = 0.15
//!
//! [grid]
//! dx = "10 m"
//! dt = "0.1 s"
//! horizon = "350 s"
//!
//! [initial]
//! kind = "cosine"          # equilibrium | cosine | file
//! amplitude = "10 veh/km"
//! wavenumber = "0.0251327 1/m"
//!
//! [control]
//! mode = "compare"         # open | closed | compare
//! gain = "0.25 1/s"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::export::{read_initial_csv, PlotKind};
use super::units::{Dimension, Quantity};
use crate::controller::{feedback_law, ControlField, ControlGain};
use crate::error::{Error, Result};
use crate::linearization::linear_coeffs;
use crate::metrics::FuelCoeffs;
use crate::model::{equilibrium, in_region_omega, Equilibrium, ModelParams, ParamSet};
use crate::solver::{Extrapolation, Mode, SolverOptions, CFL_MAX};
use crate::state::{Grid, TrafficState};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    initial: RawInitial,
    #[serde(default)]
    control: RawControl,
    #[serde(default)]
    output: RawOutput,
    fuel: Option<FuelCoeffs>,
    #[serde(default)]
    solver: RawSolver,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    q_in: Option<Quantity>,
    length: Option<Quantity>,
    vehicle_length: Option<Quantity>,
    penetration: Option<Quantity>,
    tau_acc: Option<Quantity>,
    tau_m: Option<Quantity>,
    h_m: Option<Quantity>,
    h_acc_bar: Option<Quantity>,
    v_f: Option<Quantity>,
    rho_min: Option<Quantity>,
    h_max: Option<Quantity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    dx: Option<Quantity>,
    dt: Option<Quantity>,
    horizon: Option<Quantity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<String>,
    amplitude: Option<Quantity>,
    wavenumber: Option<Quantity>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    mode: Option<String>,
    gain: Option<Quantity>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    stride: Option<usize>,
    plots: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    extrapolation: Option<Extrapolation>,
    cfl_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialCondition {
    Equilibrium,
    /// `rho = rho_bar + amplitude cos(wavenumber x)`, `v = q_in / rho`.
    Cosine {
        amplitude: f64,
        wavenumber: f64,
    },
    /// Nodal `x,rho,v` columns, or the first time slice of a trajectory CSV.
    File {
        path: PathBuf,
    },
}

impl InitialCondition {
    pub fn build(&self, p: &ModelParams, grid: &Grid, eq: &Equilibrium) -> Result<TrafficState> {
        match self {
            InitialCondition::Equilibrium => Ok(TrafficState::at_equilibrium(grid, eq)),
            InitialCondition::Cosine {
                amplitude,
                wavenumber,
            } => Ok(TrafficState::cosine(grid, p, eq, *amplitude, *wavenumber)),
            InitialCondition::File { path } => {
                let state = read_initial_csv(path)?;
                state.check_grid(grid)?;
                Ok(state)
            }
        }
    }
}

/// Which closed-loop configuration(s) a run covers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlMode {
    Open,
    Closed,
    Compare,
}

impl std::str::FromStr for ControlMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(ControlMode::Open),
            "closed" => Ok(ControlMode::Closed),
            "compare" => Ok(ControlMode::Compare),
            other => Err(Error::Config(format!(
                "control mode `{other}` is not one of open, closed, compare"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Keep every `stride`-th time sample in exported CSVs.
    pub stride: usize,
    pub plots: Vec<PlotKind>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            stride: 10,
            plots: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub params: ModelParams,
    pub grid: Grid,
    pub initial: InitialCondition,
    pub mode: ControlMode,
    pub gain: ControlGain,
    pub output: OutputSpec,
    pub fuel: FuelCoeffs,
    pub solver: SolverOptions,
    /// SHA-256 of the scenario file contents (of the empty string for the
    /// built-in nominal scenario).
    pub hash: String,
}

impl Scenario {
    /// The built-in nominal scenario, identical to loading an empty file.
    pub fn nominal() -> Self {
        parse_scenario("", Path::new("<nominal>")).expect("nominal scenario is valid")
    }

    pub fn equilibrium(&self) -> Result<Equilibrium> {
        equilibrium(&self.params)
    }

    pub fn initial_state(&self) -> Result<TrafficState> {
        self.initial
            .build(&self.params, &self.grid, &self.equilibrium()?)
    }

    /// Applies command-line overrides and re-validates the initial state.
    pub fn with_overrides(mut self, mode: Option<ControlMode>, gain: Option<f64>) -> Result<Self> {
        if let Some(m) = mode {
            self.mode = m;
        }
        if let Some(k) = gain {
            self.gain = ControlGain::new(k)?;
        }
        check_initial_in_region(&self)?;
        Ok(self)
    }

    /// Solver modes covered by the scenario, open loop first.
    pub fn modes(&self) -> Vec<Mode> {
        match self.mode {
            ControlMode::Open => vec![Mode::OpenLoop],
            ControlMode::Closed => vec![Mode::ClosedLoop(self.gain)],
            ControlMode::Compare => vec![Mode::OpenLoop, Mode::ClosedLoop(self.gain)],
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text, path)
}

/// Parses and validates scenario text; relative file paths resolve against
/// the directory of `path`.
pub fn parse_scenario(text: &str, path: &Path) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let field_line = |key: &str| {
        text.lines()
            .position(|l| l.trim_start().starts_with(key))
            .map(|i| i + 1)
            .unwrap_or(0)
    };
    let convert =
        |q: &Option<Quantity>, key: &'static str, dim: Dimension, default: f64| -> Result<f64> {
            match q {
                None => Ok(default),
                Some(q) => q.to_si(dim).map_err(|message| Error::Parse {
                    path: path.to_path_buf(),
                    line: field_line(key),
                    message: format!("{key}: {message}"),
                }),
            }
        };

    let d = ParamSet::default();
    let rp = &raw.params;
    let set = ParamSet {
        q_in: convert(&rp.q_in, "q_in", Dimension::Flow, d.q_in)?,
        length: convert(&rp.length, "length", Dimension::Length, d.length)?,
        vehicle_length: convert(
            &rp.vehicle_length,
            "vehicle_length",
            Dimension::Length,
            d.vehicle_length,
        )?,
        penetration: convert(
            &rp.penetration,
            "penetration",
            Dimension::Dimensionless,
            d.penetration,
        )?,
        tau_acc: convert(&rp.tau_acc, "tau_acc", Dimension::Time, d.tau_acc)?,
        tau_m: convert(&rp.tau_m, "tau_m", Dimension::Time, d.tau_m)?,
        h_m: convert(&rp.h_m, "h_m", Dimension::Time, d.h_m)?,
        h_acc_bar: convert(&rp.h_acc_bar, "h_acc_bar", Dimension::Time, d.h_acc_bar)?,
        v_f: convert(&rp.v_f, "v_f", Dimension::Speed, d.v_f)?,
        rho_min: convert(&rp.rho_min, "rho_min", Dimension::Density, d.rho_min)?,
        h_max: convert(&rp.h_max, "h_max", Dimension::Time, d.h_max)?,
    };
    let params = ModelParams::new(set)?;

    let rg = &raw.grid;
    let grid = Grid::new(
        params.length(),
        convert(&rg.dx, "dx", Dimension::Length, 10.0)?,
        convert(&rg.dt, "dt", Dimension::Time, 0.1)?,
        convert(&rg.horizon, "horizon", Dimension::Time, 350.0)?,
    )?;

    let ri = &raw.initial;
    let initial = match ri.kind.as_deref().unwrap_or("cosine") {
        "equilibrium" => InitialCondition::Equilibrium,
        "cosine" => InitialCondition::Cosine {
            amplitude: convert(&ri.amplitude, "amplitude", Dimension::Density, 0.01)?,
            wavenumber: convert(
                &ri.wavenumber,
                "wavenumber",
                Dimension::Wavenumber,
                8.0 * std::f64::consts::PI / params.length(),
            )?,
        },
        "file" => {
            let rel = ri.path.clone().ok_or_else(|| {
                Error::Config("initial.kind = \"file\" requires initial.path".into())
            })?;
            let base = path.parent().unwrap_or(Path::new("."));
            InitialCondition::File {
                path: if rel.is_absolute() {
                    rel
                } else {
                    base.join(rel)
                },
            }
        }
        other => {
            return Err(Error::Config(format!(
                "initial.kind `{other}` is not one of equilibrium, cosine, file"
            )))
        }
    };

    let mode: ControlMode = raw.control.mode.as_deref().unwrap_or("compare").parse()?;
    let gain = ControlGain::new(convert(&raw.control.gain, "gain", Dimension::Rate, 0.25)?)?;

    let output = OutputSpec {
        stride: raw.output.stride.unwrap_or(10),
        plots: raw
            .output
            .plots
            .unwrap_or_default()
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?,
    };
    if output.stride == 0 {
        return Err(Error::InvalidParameter {
            name: "stride",
            reason: "must be at least 1".into(),
        });
    }

    let fuel = raw.fuel.unwrap_or_default();
    fuel.validate()?;

    let solver = SolverOptions {
        extrapolation: raw.solver.extrapolation.unwrap_or_default(),
        cfl_max: raw.solver.cfl_max.unwrap_or(CFL_MAX),
    };
    if !(solver.cfl_max > 0.0 && solver.cfl_max <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "cfl_max",
            reason: format!("must lie in (0, 1], got {}", solver.cfl_max),
        });
    }

    let scenario = Scenario {
        params,
        grid,
        initial,
        mode,
        gain,
        output,
        fuel,
        solver,
        hash: sha256_hex(text.as_bytes()),
    };
    check_initial_in_region(&scenario)?;
    Ok(scenario)
}

/// The initial state must lie in the admissible region for every mode the
/// scenario runs.
fn check_initial_in_region(s: &Scenario) -> Result<()> {
    let eq = s.equilibrium()?;
    let lc = linear_coeffs(&s.params, &eq);
    let state = s.initial_state()?;
    for mode in s.modes() {
        let control = match mode {
            Mode::OpenLoop => ControlField::uniform(eq.h_acc_bar, state.len()),
            Mode::ClosedLoop(gain) => feedback_law(&state, &eq, &lc, gain, &s.params)?,
        };
        for j in 0..state.len() {
            if !in_region_omega(state.rho[j], state.v[j], control.h_acc[j], &s.params) {
                return Err(Error::InvalidParameter {
                    name: "initial",
                    reason: format!(
                        "initial state leaves the admissible region at x = {} m (rho = {}, v = {})",
                        state.x[j], state.rho[j], state.v[j]
                    ),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Scenario> {
        parse_scenario(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_file_is_nominal() {
        let s = parse("").unwrap();
        assert_eq!(s.params, ModelParams::nominal());
        assert_eq!(s.grid, Grid::nominal(&s.params));
        assert_eq!(s.mode, ControlMode::Compare);
        assert_eq!(s.gain.value(), 0.25);
        match s.initial {
            InitialCondition::Cosine {
                amplitude,
                wavenumber,
            } => {
                assert!((amplitude - 0.01).abs() < 1e-15);
                assert!((wavenumber - 8.0 * std::f64::consts::PI / 1000.0).abs() < 1e-15);
            }
            _ => panic!("default initial condition should be the cosine profile"),
        }
    }

    #[test]
    fn unit_strings_match_si_numbers() {
        let a = parse("[params]\nq_in = \"1200 veh/h\"\nlength = \"1 km\"\nv_f = \"100 km/h\"\n")
            .unwrap();
        let b = parse(
            "[params]\nq_in = 0.3333333333333333\nlength = 1000.0\nv_f = 27.77777777777778\n",
        )
        .unwrap();
        assert!((a.params.q_in() - b.params.q_in()).abs() < 1e-15);
        assert!((a.params.v_f() - b.params.v_f()).abs() < 1e-12);
    }

    #[test]
    fn infeasible_inflow_is_named() {
        let err = parse("[params]\nq_in = \"1500 veh/h\"\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(
            err.to_string().contains("q_in") || err.to_string().contains("inflow"),
            "{err}"
        );
    }

    #[test]
    fn syntax_error_reports_line() {
        match parse("[params]\n\nq_in = = 3\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_field_is_rejected() {
        let err = parse("[grid]\ncells = 100\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn bad_unit_reports_field_line() {
        match parse("[grid]\ndx = \"10 m\"\ndt = \"0.1 km\"\n").unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("dt"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn oversized_perturbation_is_rejected() {
        let err = parse("[initial]\namplitude = \"120 veh/km\"\n").unwrap_err();
        assert!(err.to_string().contains("admissible"), "{err}");
    }

    #[test]
    fn hash_tracks_contents() {
        assert_ne!(parse("").unwrap().hash, parse("# comment\n").unwrap().hash);
        assert_eq!(parse("").unwrap().hash, Scenario::nominal().hash);
    }
}
