use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::{linearized_closed_loop_rhs, linearized_rhs, LinearCoeffs};
use crate::state::Grid;

/// Actuation for the linearised system. The closed-loop gain is taken raw so
/// that analysis code can probe non-stabilising gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LinearMode {
    OpenLoop,
    ClosedLoop { gain: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTrajectory {
    pub grid: Grid,
    pub x: Vec<f64>,
    pub times: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl LinearTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn project_boundaries(rho: &mut [f64], v: &mut [f64], lc: &LinearCoeffs) {
    let last = rho.len() - 1;
    rho[last] = rho[last - 1];
    v[0] = v[1];
    rho[0] = -lc.c5 * v[0];
}

/// Forward-Euler integration of the linearised deviations with the
/// unsaturated feedback law (closed loop) or `h_dev = 0` (open loop).
/// The closed loop uses the reduced speed source `-k v_dev`.
/// Boundary closures are re-imposed after every step.
pub fn simulate_linear(
    lc: &LinearCoeffs,
    grid: &Grid,
    rho0: &[f64],
    v0: &[f64],
    mode: LinearMode,
    record_every: usize,
) -> Result<LinearTrajectory> {
    let n = grid.nodes();
    if rho0.len() != n || v0.len() != n {
        return Err(Error::GridMismatch(format!(
            "initial deviations have {}/{} nodes, grid has {n}",
            rho0.len(),
            v0.len()
        )));
    }
    let cfl = grid.dt * lc.max_char_speed() / grid.dx;
    if cfl > super::CFL_MAX {
        return Err(Error::Cfl {
            step: 0,
            cfl,
            limit: super::CFL_MAX,
        });
    }
    if let LinearMode::ClosedLoop { .. } = mode {
        if lc.c3 == 0.0 {
            return Err(Error::NoAuthority);
        }
    }
    let every = record_every.max(1);
    let steps = grid.steps();
    let mut rho = rho0.to_vec();
    let mut v = v0.to_vec();
    let mut out = LinearTrajectory {
        grid: *grid,
        x: grid.x(),
        times: Vec::new(),
        rho: Vec::new(),
        v: Vec::new(),
    };
    let h_open = vec![0.0; n];
    for step in 0..=steps {
        if step % every == 0 {
            out.times.push(step as f64 * grid.dt);
            out.rho.push(rho.clone());
            out.v.push(v.clone());
        }
        if step == steps {
            break;
        }
        let (rho_t, v_t) = match mode {
            LinearMode::OpenLoop => linearized_rhs(&rho, &v, &h_open, lc, grid),
            LinearMode::ClosedLoop { gain } => linearized_closed_loop_rhs(&rho, &v, gain, lc, grid),
        };
        for j in 0..n {
            rho[j] += grid.dt * rho_t[j];
            v[j] += grid.dt * v_t[j];
        }
        project_boundaries(&mut rho, &mut v, lc);
    }
    Ok(out)
}
