use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Equilibrium, ModelParams};

/// Uniform space-time discretisation. The stretch `[0, D]` is split into
/// `cells` intervals of width `dx`; fields live on the `cells + 1` nodes
/// `x_j = j dx`, so both boundaries carry a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub cells: usize,
    pub dx: f64,
    pub dt: f64,
    pub horizon: f64,
}

impl Grid {
    /// Grid with the requested spacing; `length / dx` must be an integer.
    pub fn new(length: f64, dx: f64, dt: f64, horizon: f64) -> Result<Self> {
        for (name, value) in [("dx", dx), ("dt", dt), ("horizon", horizon)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        let cells = (length / dx).round();
        if cells < 2.0 || ((cells * dx - length).abs() > 1e-9 * length) {
            return Err(Error::InvalidParameter {
                name: "dx",
                reason: format!(
                    "{dx} m does not divide the stretch length {length} m into >= 2 cells"
                ),
            });
        }
        let steps = (horizon / dt).round();
        if (steps * dt - horizon).abs() > 1e-9 * horizon {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("{dt} s does not divide the horizon {horizon} s"),
            });
        }
        Ok(Grid {
            cells: cells as usize,
            dx,
            dt,
            horizon,
        })
    }

    /// 10 m cells, 0.1 s steps, 350 s horizon.
    pub fn nominal(p: &ModelParams) -> Self {
        Self::new(p.length(), 10.0, 0.1, 350.0).expect("nominal grid is valid")
    }

    pub fn nodes(&self) -> usize {
        self.cells + 1
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn length(&self) -> f64 {
        self.cells as f64 * self.dx
    }

    pub fn x(&self) -> Vec<f64> {
        (0..self.nodes()).map(|j| j as f64 * self.dx).collect()
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(self.length(), self.dx, self.dt, horizon)
    }
}

/// Density and speed on the grid nodes at one time instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficState {
    pub t: f64,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
}

impl TrafficState {
    pub fn uniform(grid: &Grid, rho: f64, v: f64) -> Self {
        let n = grid.nodes();
        TrafficState {
            t: 0.0,
            x: grid.x(),
            rho: vec![rho; n],
            v: vec![v; n],
        }
    }

    pub fn at_equilibrium(grid: &Grid, eq: &Equilibrium) -> Self {
        Self::uniform(grid, eq.rho_bar, eq.v_bar)
    }

    /// `rho(x,0) = rho_bar + amplitude cos(wavenumber x)`, `v = q_in / rho`.
    pub fn cosine(
        grid: &Grid,
        p: &ModelParams,
        eq: &Equilibrium,
        amplitude: f64,
        wavenumber: f64,
    ) -> Self {
        let x = grid.x();
        let rho: Vec<f64> = x
            .iter()
            .map(|&x| eq.rho_bar + amplitude * (wavenumber * x).cos())
            .collect();
        let v = rho.iter().map(|&r| p.q_in() / r).collect();
        TrafficState { t: 0.0, x, rho, v }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Deviations `(rho - rho_bar, v - v_bar)`.
    pub fn deviations(&self, eq: &Equilibrium) -> (Vec<f64>, Vec<f64>) {
        (
            self.rho.iter().map(|r| r - eq.rho_bar).collect(),
            self.v.iter().map(|v| v - eq.v_bar).collect(),
        )
    }

    /// `max_x |v - v_bar|`.
    pub fn speed_deviation_sup(&self, eq: &Equilibrium) -> f64 {
        self.v
            .iter()
            .map(|v| (v - eq.v_bar).abs())
            .fold(0.0, f64::max)
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if self.len() != grid.nodes() || self.rho.len() != self.len() || self.v.len() != self.len()
        {
            return Err(Error::GridMismatch(format!(
                "state has {} nodes ({} rho, {} v), grid has {}",
                self.len(),
                self.rho.len(),
                self.v.len(),
                grid.nodes()
            )));
        }
        Ok(())
    }
}
