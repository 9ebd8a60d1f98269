//! Explicit finite-volume integration of the nonlinear model.
//!
//! Density is advanced in flux form with a Rusanov (local Lax-Friedrichs)
//! interface flux, so vehicles are conserved up to the boundary fluxes.
//! Speed is advanced in quasilinear form: a centred derivative transported
//! at `lambda2`, the same Rusanov diffusion, and the relaxation source added
//! in the same explicit step. The inlet flux is `q_in`; the outlet flux is
//! the boundary node's `rho v`.

mod linear;
mod speed;

pub use linear::{simulate_linear, LinearMode, LinearTrajectory};
pub use speed::simulate_linear_speed_subsystem;

use serde::{Deserialize, Serialize};

use crate::controller::{closed_loop_source, feedback_law, ControlField, ControlGain};
use crate::error::{Error, Result};
use crate::linearization::linear_coeffs;
use crate::model::{
    char_speeds, equilibrium, h_mix_unchecked, in_region_omega, mixed_time_constant, ModelParams,
};
use crate::state::{Grid, TrafficState};

/// Default stability ceiling for `dt max|lambda| / dx`.
pub const CFL_MAX: f64 = 0.9;

/// How the "missing" boundary values are filled from the interior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    /// Copy the nearest interior node.
    #[default]
    Constant,
    /// Linear extrapolation from the two nearest interior nodes.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub extrapolation: Extrapolation,
    pub cfl_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            extrapolation: Extrapolation::Constant,
            cfl_max: CFL_MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    OpenLoop,
    ClosedLoop(ControlGain),
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::OpenLoop => "open",
            Mode::ClosedLoop(_) => "closed",
        }
    }
}

/// Per-step bookkeeping, recorded for the state the step started from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub cfl: f64,
    /// `sum_{interior} rho dx` [veh].
    pub mass: f64,
    pub inflow: f64,
    pub outflow: f64,
    pub saturation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub grid: Grid,
    pub mode: Mode,
    pub times: Vec<f64>,
    pub states: Vec<TrafficState>,
    pub controls: Vec<ControlField>,
    /// One entry per time step taken (`times.len() - 1`).
    pub diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Spacing of the recorded samples.
    pub fn sample_interval(&self) -> f64 {
        if self.times.len() < 2 {
            self.grid.dt
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// Index of the sample closest to time `t`.
    pub fn index_at(&self, t: f64) -> usize {
        let dt = self.sample_interval();
        ((t - self.times.first().copied().unwrap_or(0.0)) / dt)
            .round()
            .clamp(0.0, (self.len().saturating_sub(1)) as f64) as usize
    }

    pub fn control_range(&self) -> (f64, f64) {
        self.controls
            .iter()
            .map(ControlField::range)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
                (lo.min(a), hi.max(b))
            })
    }

    pub fn max_cfl(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.cfl).fold(0.0, f64::max)
    }
}

fn interior_mass(state: &TrafficState, dx: f64) -> f64 {
    let n = state.len();
    state.rho[1..n - 1].iter().sum::<f64>() * dx
}

/// CFL number `dt max|lambda| / dx` of a state under a control field.
pub fn cfl_number(
    state: &TrafficState,
    control: &ControlField,
    p: &ModelParams,
    grid: &Grid,
) -> f64 {
    let max_speed = state
        .rho
        .iter()
        .zip(&state.v)
        .zip(&control.h_acc)
        .map(|((&r, &v), &h)| {
            let (l1, l2) = char_speeds(r, v, h, p);
            l1.abs().max(l2.abs())
        })
        .fold(0.0, f64::max);
    grid.dt * max_speed / grid.dx
}

/// Fill the boundary nodes of a freshly updated interior.
///
/// The outlet speed takes one forward-Euler step of the relaxation ODE using
/// the outlet values of `previous`; the inlet density follows from
/// `rho(0) v(0) = q_in` with the inlet speed extrapolated from the interior;
/// the outlet density is extrapolated from the interior.
pub fn apply_boundaries(
    next: &mut TrafficState,
    previous: &TrafficState,
    control: &ControlField,
    p: &ModelParams,
    dt: f64,
    extrapolation: Extrapolation,
    step: usize,
) -> Result<()> {
    let n = next.len();
    let last = n - 1;
    let outlet_source = {
        let rho = previous.rho[last];
        let h_mix = h_mix_unchecked(control.h_acc[last], p);
        ((1.0 / rho - p.vehicle_length()) / h_mix - previous.v[last]) / mixed_time_constant(p)
    };
    next.v[last] = previous.v[last] + dt * outlet_source;
    next.rho[last] = match extrapolation {
        Extrapolation::Constant => next.rho[last - 1],
        Extrapolation::Linear => 2.0 * next.rho[last - 1] - next.rho[last - 2],
    };
    let inlet_speed = match extrapolation {
        Extrapolation::Constant => next.v[1],
        Extrapolation::Linear => 2.0 * next.v[1] - next.v[2],
    };
    if !(inlet_speed > 0.0) {
        return Err(Error::Boundary {
            step,
            speed: inlet_speed,
        });
    }
    next.v[0] = inlet_speed;
    next.rho[0] = p.q_in() / inlet_speed;
    Ok(())
}

/// One explicit step. Returns the new state and the diagnostics of the step.
pub fn step_nonlinear(
    state: &TrafficState,
    control: &ControlField,
    p: &ModelParams,
    grid: &Grid,
    opts: &SolverOptions,
    step: usize,
) -> Result<(TrafficState, StepDiagnostics)> {
    let n = state.len();
    let last = n - 1;
    let (dt, dx) = (grid.dt, grid.dx);

    let mut lambda2 = Vec::with_capacity(n);
    let mut speed = Vec::with_capacity(n);
    for j in 0..n {
        let (l1, l2) = char_speeds(state.rho[j], state.v[j], control.h_acc[j], p);
        lambda2.push(l2);
        speed.push(l1.abs().max(l2.abs()));
    }
    let cfl = dt * speed.iter().copied().fold(0.0, f64::max) / dx;
    if !(cfl <= opts.cfl_max) {
        return Err(Error::Cfl {
            step,
            cfl,
            limit: opts.cfl_max,
        });
    }

    let inflow = p.q_in();
    let outflow = state.rho[last] * state.v[last];
    // interface j+1/2, j = 0..last
    let mut diffusion = Vec::with_capacity(last);
    let mut flux = Vec::with_capacity(last);
    for j in 0..last {
        let a = speed[j].max(speed[j + 1]);
        diffusion.push(a);
        flux.push(if j == 0 {
            inflow
        } else if j == last - 1 {
            outflow
        } else {
            0.5 * (state.rho[j] * state.v[j] + state.rho[j + 1] * state.v[j + 1])
                - 0.5 * a * (state.rho[j + 1] - state.rho[j])
        });
    }
    let source = closed_loop_source(state, control, p);

    let mut next = state.clone();
    next.t = state.t + dt;
    for j in 1..last {
        next.rho[j] = state.rho[j] - dt / dx * (flux[j] - flux[j - 1]);
        let v = &state.v;
        let centred = lambda2[j] * (v[j + 1] - v[j - 1]) / (2.0 * dx);
        let smoothing =
            (diffusion[j] * (v[j + 1] - v[j]) - diffusion[j - 1] * (v[j] - v[j - 1])) / (2.0 * dx);
        next.v[j] = v[j] + dt * (-centred + smoothing + source[j]);
    }
    apply_boundaries(&mut next, state, control, p, dt, opts.extrapolation, step)?;

    for j in 0..n {
        if !in_region_omega(next.rho[j], next.v[j], control.h_acc[j], p) {
            return Err(Error::RegionExit {
                step,
                node: j,
                x: next.x[j],
                rho: next.rho[j],
                v: next.v[j],
                h_acc: control.h_acc[j],
            });
        }
    }

    let diag = StepDiagnostics {
        cfl,
        mass: interior_mass(state, dx),
        inflow,
        outflow,
        saturation: control.saturation_fraction(),
    };
    Ok((next, diag))
}

/// Run the model over the grid horizon, recording every `record_every`-th
/// step (and always the initial state).
pub fn simulate(
    p: &ModelParams,
    grid: &Grid,
    initial: &TrafficState,
    mode: Mode,
    opts: &SolverOptions,
    record_every: usize,
) -> Result<Trajectory> {
    initial.check_grid(grid)?;
    let eq = equilibrium(p)?;
    let lc = linear_coeffs(p, &eq);
    let every = record_every.max(1);
    let nodes = grid.nodes();
    let control_for = |s: &TrafficState| -> Result<ControlField> {
        match mode {
            Mode::OpenLoop => Ok(ControlField::uniform(eq.h_acc_bar, nodes)),
            Mode::ClosedLoop(gain) => feedback_law(s, &eq, &lc, gain, p),
        }
    };
    let initial_control = control_for(initial)?;
    for j in 0..nodes {
        let h = initial_control.h_acc[j];
        if !in_region_omega(initial.rho[j], initial.v[j], h, p) {
            return Err(Error::RegionExit {
                step: 0,
                node: j,
                x: initial.x[j],
                rho: initial.rho[j],
                v: initial.v[j],
                h_acc: h,
            });
        }
    }

    let steps = grid.steps();
    let mut traj = Trajectory {
        grid: *grid,
        mode,
        times: Vec::with_capacity(steps / every + 1),
        states: Vec::with_capacity(steps / every + 1),
        controls: Vec::with_capacity(steps / every + 1),
        diagnostics: Vec::with_capacity(steps),
    };
    let mut state = initial.clone();
    state.t = 0.0;
    for step in 0..steps {
        let control = control_for(&state)?;
        let (next, diag) = step_nonlinear(&state, &control, p, grid, opts, step)?;
        if step % every == 0 {
            traj.times.push(state.t);
            traj.states.push(state);
            traj.controls.push(control);
        }
        traj.diagnostics.push(diag);
        state = next;
        state.t = (step + 1) as f64 * grid.dt;
    }
    if steps.is_multiple_of(every) {
        let control = control_for(&state)?;
        traj.times.push(state.t);
        traj.states.push(state);
        traj.controls.push(control);
    }
    Ok(traj)
}
