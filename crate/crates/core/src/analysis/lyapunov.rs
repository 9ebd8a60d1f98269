//! Exponentially weighted Lyapunov functional for the closed loop and a
//! discrete decay certificate along simulated trajectories.
//!
//! With the nominal parameters the weights span `exp(-2 k1 x)` and
//! `exp(2 k2 x)` with `k1 D`, `k2 D` of order `1e12`, far outside `f64`
//! range. Values are therefore carried as logarithms relative to the fixed
//! offset `2 k2 p D`.

use serde::{Deserialize, Serialize};

use crate::linearization::{riemann_from_deviations, LinearCoeffs};
use crate::numerics::{gradient, trapezoid_weight};
use crate::solver::LinearTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovGains {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
}

/// Weight choices that make `dV_p/dt <= -p k V_p` along the closed loop.
pub fn lyapunov_gains(lc: &LinearCoeffs, k: f64) -> LyapunovGains {
    let (rho_bar, v_bar, h_mix) = (lc.eq.rho_bar, lc.eq.v_bar, lc.eq.h_mix_bar);
    let l = lc.vehicle_length;
    let rho2 = rho_bar * rho_bar;
    let c6 = k * (lc.c2 * lc.length / v_bar).exp() * h_mix * rho2 * (1.0 + lc.c2 / v_bar);
    let c7 = l * rho2 / v_bar;
    let c8 = 2.0 * l * rho2 / (v_bar * v_bar) * lc.c4;
    let c9 = 2.0 * k * rho2 / v_bar * (h_mix + l / v_bar + l * lc.c2 / (v_bar * k));
    let k1 = (lc.c2 + c6 + k) / v_bar;
    let k2 = c6 / (2.0 * lc.c4);
    let k3 = ((c7 + c8 + c9) * (v_bar / lc.c4).max(1.0)).max(1.0);
    let k4 = k3 * (lc.c4 / k).max(1.0);
    LyapunovGains {
        k1,
        k2,
        k3,
        k4,
        c6,
        c7,
        c8,
        c9,
    }
}

/// `V = exp(ln_offset + ln_rel)`; `ln_rel = -inf` encodes `V = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    pub ln_offset: f64,
    pub ln_rel: f64,
}

impl FunctionalValue {
    pub fn ln(&self) -> f64 {
        self.ln_offset + self.ln_rel
    }

    /// Plain value; overflows to `inf` for the nominal gains.
    pub fn value(&self) -> f64 {
        if self.ln_rel == f64::NEG_INFINITY {
            0.0
        } else {
            self.ln().exp()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_rel == f64::NEG_INFINITY
    }
}

struct LogSum {
    terms: Vec<f64>,
}

impl LogSum {
    fn new() -> Self {
        LogSum { terms: Vec::new() }
    }

    /// Adds `exp(ln_weight) * |x|^(2p)`.
    fn push(&mut self, ln_weight: f64, x: f64, p: u32) {
        if x != 0.0 {
            self.terms.push(ln_weight + 2.0 * p as f64 * x.abs().ln());
        }
    }

    fn ln(&self) -> f64 {
        let max = self.terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + self.terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }
}

/// `V_p = V1 + k3^(2p) V2 + k4^(2p) exp(2 k2 p D) V3` with
/// `V1 = int exp(-2 k1 p x)(z^2p + z_x^2p)`, `V2 = int exp(2 k2 p x)(v^2p + v_x^2p)`,
/// `V3 = v(D)^2p`; integrals by the trapezoid rule on nodes `j dx`.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov_functional(
    z: &[f64],
    z_x: &[f64],
    v: &[f64],
    v_x: &[f64],
    v_outlet: f64,
    gains: &LyapunovGains,
    p: u32,
    dx: f64,
) -> FunctionalValue {
    assert!(p >= 1, "order p must be a positive integer");
    let n = z.len();
    let length = (n - 1) as f64 * dx;
    let pf = p as f64;
    let ln_offset = 2.0 * gains.k2 * pf * length;
    let mut sum = LogSum::new();
    let ln_k3 = 2.0 * pf * gains.k3.ln();
    for j in 0..n {
        let x = j as f64 * dx;
        let ln_w = (trapezoid_weight(j, n) * dx).ln();
        let e1 = ln_w - 2.0 * gains.k1 * pf * x - ln_offset;
        sum.push(e1, z[j], p);
        sum.push(e1, z_x[j], p);
        // 2 k2 p x - offset = -2 k2 p (D - x), kept in that form for precision
        let e2 = ln_w + ln_k3 - 2.0 * gains.k2 * pf * (length - x);
        sum.push(e2, v[j], p);
        sum.push(e2, v_x[j], p);
    }
    sum.push(2.0 * pf * gains.k4.ln(), v_outlet, p);
    FunctionalValue {
        ln_offset,
        ln_rel: sum.ln(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub p: u32,
    pub k: f64,
    pub gains: LyapunovGains,
    pub tol: f64,
    pub times: Vec<f64>,
    pub samples: Vec<FunctionalValue>,
    /// Steps with `V(t+h) > V(t) (1 + tol)`.
    pub increase_violations: usize,
    /// Steps with `V(t+h) > exp(-p k h) V(t) (1 + tol)`.
    pub decay_violations: usize,
    /// Samples with `V(t) > exp(-p k t) V(0) (1 + tol)`.
    pub cumulative_violations: usize,
    /// Largest `ln(V(t+h)/V(t))` seen.
    pub worst_log_increase: f64,
    /// Largest `ln(V(t+h)/V(t)) + p k h` seen.
    pub worst_log_excess: f64,
}

impl LyapunovReport {
    /// `dV/dt <= -p k V` holds in discrete form, both step to step and
    /// integrated from the first sample.
    pub fn passed(&self) -> bool {
        self.decay_violations == 0 && self.cumulative_violations == 0
    }

    /// Plain step-to-step non-increase within tolerance.
    pub fn non_increasing(&self) -> bool {
        self.increase_violations == 0
    }
}

/// Functional value at each sample of a linear trajectory.
pub fn functional_along(
    traj: &LinearTrajectory,
    lc: &LinearCoeffs,
    gains: &LyapunovGains,
    p: u32,
) -> Vec<FunctionalValue> {
    let dx = traj.grid.dx;
    traj.rho
        .iter()
        .zip(&traj.v)
        .map(|(rho, v)| {
            let z = riemann_from_deviations(rho, v, &traj.x, lc);
            let z_x = gradient(&z, dx);
            let v_x = gradient(v, dx);
            lyapunov_functional(&z, &z_x, v, &v_x, *v.last().unwrap(), gains, p, dx)
        })
        .collect()
}

/// Checks `V(t+h) <= exp(-p k h) V(t) (1 + tol)` between consecutive
/// samples, `V(t) <= exp(-p k t) V(0) (1 + tol)` at every sample, and plain
/// non-increase `V(t+h) <= V(t) (1 + tol)`.
pub fn certify_decay(
    traj: &LinearTrajectory,
    lc: &LinearCoeffs,
    gains: &LyapunovGains,
    p: u32,
    k: f64,
    tol: f64,
) -> LyapunovReport {
    let samples = functional_along(traj, lc, gains, p);
    let slack = (1.0 + tol).ln();
    let (mut increases, mut violations) = (0, 0);
    let (mut worst_inc, mut worst) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (w, t) in samples.windows(2).zip(traj.times.windows(2)) {
        let (a, b) = (w[0], w[1]);
        if b.is_zero() {
            continue;
        }
        let increase = if a.is_zero() {
            f64::INFINITY
        } else {
            (b.ln_rel - a.ln_rel) + (b.ln_offset - a.ln_offset)
        };
        let excess = increase + p as f64 * k * (t[1] - t[0]);
        worst_inc = worst_inc.max(increase);
        worst = worst.max(excess);
        if increase > slack {
            increases += 1;
        }
        if excess > slack {
            violations += 1;
        }
    }
    let cumulative = match samples.first() {
        Some(first) if !first.is_zero() => samples
            .iter()
            .zip(&traj.times)
            .filter(|(v, t)| {
                !v.is_zero()
                    && (v.ln_rel - first.ln_rel)
                        + (v.ln_offset - first.ln_offset)
                        + p as f64 * k * (*t - traj.times[0])
                        > slack
            })
            .count(),
        Some(_) => samples.iter().filter(|v| !v.is_zero()).count(),
        None => 0,
    };
    LyapunovReport {
        p,
        k,
        gains: *gains,
        tol,
        times: traj.times.clone(),
        samples,
        increase_violations: increases,
        decay_violations: violations,
        cumulative_violations: cumulative,
        worst_log_increase: worst_inc,
        worst_log_excess: worst,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearization::linear_coeffs;
    use crate::model::{equilibrium, ModelParams};

    fn gains(k1: f64, k2: f64, k3: f64, k4: f64) -> LyapunovGains {
        LyapunovGains {
            k1,
            k2,
            k3,
            k4,
            c6: 0.0,
            c7: 0.0,
            c8: 0.0,
            c9: 0.0,
        }
    }

    #[test]
    fn zero_fields_give_zero() {
        let z = vec![0.0; 11];
        let v = lyapunov_functional(&z, &z, &z, &z, 0.0, &gains(0.1, 0.1, 1.0, 1.0), 1, 1.0);
        assert!(v.is_zero());
        assert_eq!(v.value(), 0.0);
    }

    #[test]
    fn constant_riemann_field_closed_form() {
        let k1 = 0.004;
        let n = 2001;
        let dx = 0.5;
        let ones = vec![1.0; n];
        let zeros = vec![0.0; n];
        let v = lyapunov_functional(
            &ones,
            &zeros,
            &zeros,
            &zeros,
            0.0,
            &gains(k1, 0.002, 1.0, 1.0),
            1,
            dx,
        );
        let d = 1000.0;
        let exact = (1.0 - (-2.0 * k1 * d).exp()) / (2.0 * k1);
        assert!(
            (v.value() - exact).abs() < 1e-5 * exact,
            "{} vs {exact}",
            v.value()
        );
    }

    #[test]
    fn nominal_gains_are_positive_and_ordered() {
        let p = ModelParams::nominal();
        let lc = linear_coeffs(&p, &equilibrium(&p).unwrap());
        let g = lyapunov_gains(&lc, 0.25);
        for x in [g.k1, g.k2, g.k3, g.k4, g.c6, g.c7, g.c8, g.c9] {
            assert!(x > 0.0 && x.is_finite());
        }
        assert!(g.k3 >= 1.0);
        assert!(g.k4 >= g.k3);
    }
}
