#![allow(dead_code)]

use acc_traffic::{
    equilibrium, linear_coeffs, Equilibrium, Grid, LinearCoeffs, ModelParams, TrafficState,
};

pub const AMPLITUDE: f64 = 0.01;

pub struct Nominal {
    pub p: ModelParams,
    pub eq: Equilibrium,
    pub lc: LinearCoeffs,
    pub grid: Grid,
}

pub fn nominal() -> Nominal {
    let p = ModelParams::nominal();
    let eq = equilibrium(&p).unwrap();
    Nominal {
        lc: linear_coeffs(&p, &eq),
        grid: Grid::nominal(&p),
        p,
        eq,
    }
}

pub fn wavenumber(p: &ModelParams) -> f64 {
    8.0 * std::f64::consts::PI / p.length()
}

pub fn cosine(n: &Nominal, grid: &Grid, amplitude: f64) -> TrafficState {
    TrafficState::cosine(grid, &n.p, &n.eq, amplitude, wavenumber(&n.p))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
