use serde::{Deserialize, Serialize};

use crate::numerics::{gradient, sup_abs};
use crate::solver::LinearTrajectory;

/// `|rho|_C + |rho_x|_C + |v|_C + |v_x|_C` on a uniform grid.
pub fn c1_norm(rho: &[f64], v: &[f64], dx: f64) -> f64 {
    sup_abs(rho) + sup_abs(&gradient(rho, dx)) + sup_abs(v) + sup_abs(&gradient(v, dx))
}

/// Least-squares decay rate `-d ln(norm)/dt` over `[t_start, t_end]`.
pub fn fit_decay_rate(times: &[f64], norms: &[f64], t_start: f64, t_end: f64) -> f64 {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(&t, &n)| t >= t_start && t <= t_end && n > 0.0)
        .map(|(&t, &n)| (t, n.ln()))
        .collect();
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    -sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub k: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Fitted rate over the assessment window.
    pub fitted_rate: f64,
    pub window: (f64, f64),
    /// `max_{t <= t_fit} N(t) exp(k t / 2) / N(0)`.
    pub mu_hat: f64,
    pub t_fit: f64,
    /// Samples after `t_fit` with `N(t) > mu_hat N(0) exp(-k t / 2)`.
    pub envelope_violations: usize,
}

/// C1-norm history of a linear trajectory, checked against the
/// `mu exp(-k t / 2)` envelope with `mu` fitted on `[0, t_fit]`.
pub fn decay_envelope(
    traj: &LinearTrajectory,
    k: f64,
    t_fit: f64,
    window: (f64, f64),
) -> EnvelopeReport {
    let dx = traj.grid.dx;
    let norms: Vec<f64> = traj
        .rho
        .iter()
        .zip(&traj.v)
        .map(|(r, v)| c1_norm(r, v, dx))
        .collect();
    let n0 = norms.first().copied().unwrap_or(0.0);
    let mu_hat = traj
        .times
        .iter()
        .zip(&norms)
        .filter(|(&t, _)| t <= t_fit)
        .map(|(&t, &n)| n * (0.5 * k * t).exp() / n0)
        .fold(0.0, f64::max);
    let envelope_violations = traj
        .times
        .iter()
        .zip(&norms)
        .filter(|(&t, &n)| t > t_fit && n > mu_hat * n0 * (-0.5 * k * t).exp())
        .count();
    EnvelopeReport {
        k,
        fitted_rate: fit_decay_rate(&traj.times, &norms, window.0, window.1),
        times: traj.times.clone(),
        norms,
        window,
        mu_hat,
        t_fit,
        envelope_violations,
    }
}
