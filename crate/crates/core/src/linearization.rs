//! Linearisation about the uniform congested equilibrium and the
//! exponentially weighted Riemann variable that diagonalises it.

use serde::{Deserialize, Serialize};

use crate::model::{mixed_time_constant, Equilibrium, ModelParams};
use crate::state::{Grid, TrafficState};

/// Coefficients of the linearised system together with the equilibrium
/// quantities they were built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoeffs {
    /// Density feedback into the speed equation.
    pub c1: f64,
    /// Speed relaxation rate `1/tau_mix`.
    pub c2: f64,
    /// Sensitivity of the speed equation to the ACC time-gap.
    pub c3: f64,
    /// Upstream characteristic speed `L / h_mix_bar`.
    pub c4: f64,
    /// Inlet coupling `rho_bar / v_bar`.
    pub c5: f64,
    pub a1: f64,
    pub a2: f64,
    /// `1/c4 + 1/v_bar` [s/m].
    pub tau_char: f64,
    pub eq: Equilibrium,
    pub tau_mix: f64,
    pub vehicle_length: f64,
    pub length: f64,
}

impl LinearCoeffs {
    /// `h_mix_bar rho_bar^2`, the speed weight inside the Riemann variable.
    pub fn riemann_weight(&self) -> f64 {
        self.eq.h_mix_bar * self.eq.rho_bar * self.eq.rho_bar
    }

    /// `exp(c2 x / v_bar)`.
    pub fn growth(&self, x: f64) -> f64 {
        (self.c2 * x / self.eq.v_bar).exp()
    }

    /// Largest characteristic speed at equilibrium, `max(v_bar, c4)`.
    pub fn max_char_speed(&self) -> f64 {
        self.eq.v_bar.max(self.c4)
    }
}

pub fn linear_coeffs(p: &ModelParams, eq: &Equilibrium) -> LinearCoeffs {
    let tau_mix = mixed_time_constant(p);
    let l = p.vehicle_length();
    let d = p.length();
    let Equilibrium {
        rho_bar,
        v_bar,
        h_mix_bar,
        h_acc_bar,
    } = *eq;
    let c1 = 1.0 / (rho_bar * rho_bar * tau_mix * h_mix_bar);
    let c2 = 1.0 / tau_mix;
    let c3 = p.penetration() / (p.tau_acc() * h_acc_bar * h_acc_bar) * (1.0 / rho_bar - l);
    let c4 = l / h_mix_bar;
    let c5 = rho_bar / v_bar;
    let tau_char = 1.0 / c4 + 1.0 / v_bar;
    LinearCoeffs {
        c1,
        c2,
        c3,
        c4,
        c5,
        a1: c4 * c1 * (-c2 * d / v_bar).exp() / v_bar,
        a2: v_bar * c1 * tau_mix * tau_char,
        tau_char,
        eq: *eq,
        tau_mix,
        vehicle_length: l,
        length: d,
    }
}

/// `z(x) = exp(c2 x / v_bar) (rho_dev + h_mix_bar rho_bar^2 v_dev)`.
pub fn riemann_from_deviations(
    rho_dev: &[f64],
    v_dev: &[f64],
    x: &[f64],
    lc: &LinearCoeffs,
) -> Vec<f64> {
    let w = lc.riemann_weight();
    x.iter()
        .zip(rho_dev.iter().zip(v_dev))
        .map(|(&x, (&r, &v))| lc.growth(x) * (r + w * v))
        .collect()
}

pub fn to_riemann(state: &TrafficState, lc: &LinearCoeffs) -> Vec<f64> {
    let (rho_dev, v_dev) = state.deviations(&lc.eq);
    riemann_from_deviations(&rho_dev, &v_dev, &state.x, lc)
}

/// Inverse of [`riemann_from_deviations`]: returns `(rho_dev, v_dev)`.
pub fn from_riemann(
    z: &[f64],
    v_dev: &[f64],
    x: &[f64],
    lc: &LinearCoeffs,
) -> (Vec<f64>, Vec<f64>) {
    let w = lc.riemann_weight();
    let rho = x
        .iter()
        .zip(z.iter().zip(v_dev))
        .map(|(&x, (&z, &v))| (-lc.c2 * x / lc.eq.v_bar).exp() * z - w * v)
        .collect();
    (rho, v_dev.to_vec())
}

/// Time derivatives of the linearised system on the grid nodes.
///
/// Interior nodes use the frozen-coefficient version of the nonlinear
/// scheme (centred flux plus diffusion `max_char_speed`, density in flux
/// form). Boundary rows: the inlet speed follows the first interior node and
/// the inlet density obeys `rho(0) + c5 v(0) = 0`; the outlet speed follows
/// the relaxation ODE and the outlet density follows the last interior node.
pub fn linearized_rhs(
    rho_dev: &[f64],
    v_dev: &[f64],
    h_dev: &[f64],
    lc: &LinearCoeffs,
    grid: &Grid,
) -> (Vec<f64>, Vec<f64>) {
    debug_assert!(h_dev.len() == rho_dev.len());
    rhs_with_source(rho_dev, v_dev, lc, grid, |j| {
        -lc.c1 * rho_dev[j] - lc.c2 * v_dev[j] - lc.c3 * h_dev[j]
    })
}

/// [`linearized_rhs`] under the feedback law with gain `k`, with the speed
/// source reduced to `-k v_dev`.
///
/// Substituting the law and evaluating `-c1 rho - c2 v - c3 h` cancels the
/// density terms only up to roundoff, which leaves a floor of order
/// `eps c1 |rho_dev|` under the decaying speed; the reduced form does not.
pub fn linearized_closed_loop_rhs(
    rho_dev: &[f64],
    v_dev: &[f64],
    k: f64,
    lc: &LinearCoeffs,
    grid: &Grid,
) -> (Vec<f64>, Vec<f64>) {
    rhs_with_source(rho_dev, v_dev, lc, grid, |j| -k * v_dev[j])
}

fn rhs_with_source(
    rho_dev: &[f64],
    v_dev: &[f64],
    lc: &LinearCoeffs,
    grid: &Grid,
    source: impl Fn(usize) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rho_dev.len();
    debug_assert!(n >= 3 && v_dev.len() == n);
    let last = n - 1;
    let dx = grid.dx;
    let a = lc.max_char_speed();
    let (rho_bar, v_bar) = (lc.eq.rho_bar, lc.eq.v_bar);
    let flux = |j: usize| v_bar * rho_dev[j] + rho_bar * v_dev[j];
    // interface j+1/2 for j = 0..last
    let interface: Vec<f64> = (0..last)
        .map(|j| {
            if j == 0 {
                0.0
            } else if j == last - 1 {
                flux(last)
            } else {
                0.5 * (flux(j) + flux(j + 1)) - 0.5 * a * (rho_dev[j + 1] - rho_dev[j])
            }
        })
        .collect();

    let mut rho_t = vec![0.0; n];
    let mut v_t = vec![0.0; n];
    for j in 1..last {
        rho_t[j] = -(interface[j] - interface[j - 1]) / dx;
        let centred = lc.c4 * (v_dev[j + 1] - v_dev[j - 1]) / (2.0 * dx);
        let diffusion = a * (v_dev[j + 1] - 2.0 * v_dev[j] + v_dev[j - 1]) / (2.0 * dx);
        v_t[j] = centred + diffusion + source(j);
    }
    v_t[0] = v_t[1];
    rho_t[0] = -lc.c5 * v_t[0];
    v_t[last] = source(last);
    rho_t[last] = rho_t[last - 1];
    (rho_t, v_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{equilibrium, ParamSet};

    fn nominal() -> (ModelParams, LinearCoeffs, Grid) {
        let p = ModelParams::nominal();
        let eq = equilibrium(&p).unwrap();
        (p, linear_coeffs(&p, &eq), Grid::nominal(&p))
    }

    #[test]
    fn nominal_coefficients() {
        let (_, lc, _) = nominal();
        let rel = |a: f64, b: f64| (a - b).abs() / b;
        assert!(rel(lc.c1, 5.567) < 1e-4, "{}", lc.c1);
        assert!(rel(lc.c2, 0.08917) < 1e-4);
        assert!(rel(lc.c3, 0.14383) < 1e-4, "{}", lc.c3);
        assert!(rel(lc.c4, 3.5981) < 1e-4);
        assert!(rel(lc.c5, 0.034577) < 1e-4, "{}", lc.c5);
        assert!(lc.c3 > 0.0 && lc.c4 > 0.0 && lc.c5 > 0.0);
        assert!((lc.c4 - 5.0 / lc.eq.h_mix_bar).abs() < 1e-15);
    }

    #[test]
    fn diagonalisation_identity() {
        let (_, lc, _) = nominal();
        let lhs = lc.c2;
        let rhs = lc.c1 * lc.riemann_weight();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs);
    }

    #[test]
    fn no_authority_without_acc() {
        let p = ModelParams::new(ParamSet {
            penetration: 0.0,
            ..ParamSet::default()
        })
        .unwrap();
        let lc = linear_coeffs(&p, &equilibrium(&p).unwrap());
        assert_eq!(lc.c3, 0.0);
    }

    #[test]
    fn riemann_transform_basics() {
        let (_, lc, g) = nominal();
        let x = g.x();
        let zero = vec![0.0; x.len()];
        assert!(riemann_from_deviations(&zero, &zero, &x, &lc)
            .iter()
            .all(|&z| z == 0.0));
        let mut rho = zero.clone();
        rho[0] = 0.003;
        assert_eq!(riemann_from_deviations(&rho, &zero, &x, &lc)[0], 0.003);
        let mut z = zero.clone();
        *z.last_mut().unwrap() = 1.0;
        let (r, _) = from_riemann(&z, &zero, &x, &lc);
        let expect = (-lc.c2 * 1000.0 / lc.eq.v_bar).exp();
        assert!((r.last().unwrap() - expect).abs() <= 1e-15 * expect);
    }

    #[test]
    fn rhs_zero_and_uniform_density() {
        let (_, lc, g) = nominal();
        let n = g.nodes();
        let zero = vec![0.0; n];
        let (rt, vt) = linearized_rhs(&zero, &zero, &zero, &lc, &g);
        assert!(rt.iter().chain(&vt).all(|&r| r == 0.0));
        let eps = vec![1e-3; n];
        let (_, vt) = linearized_rhs(&eps, &zero, &zero, &lc, &g);
        for &r in &vt[1..n - 1] {
            assert!((r + lc.c1 * 1e-3).abs() < 1e-15);
        }
    }
}
