//! Convective stability of the closed-loop speed subsystem.
//!
//! In closed loop the speed deviation obeys `v_t - c4 v_x = -k v`, so a
//! perturbation measured at `x1` reaches `x2 < x1` after `(x1 - x2)/c4`
//! seconds, scaled by `exp(-k (x1 - x2)/c4)`. The scaling is the exact
//! temporal `L_p` gain for every `p`, for the speed and its gradient alike.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::simulate_linear_speed_subsystem;

pub fn convective_gain(x1: f64, x2: f64, k: f64, c4: f64) -> Result<f64> {
    if !(x2 >= 0.0 && x2 < x1) {
        return Err(Error::Domain {
            what: "x2 (must satisfy 0 <= x2 < x1)",
            value: x2,
        });
    }
    Ok((-k * (x1 - x2) / c4).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PNorm {
    One,
    Two,
    Inf,
}

impl PNorm {
    /// Temporal norm of a uniformly sampled signal (rectangle rule).
    pub fn of(self, signal: &[f64], dt: f64) -> f64 {
        match self {
            PNorm::One => dt * signal.iter().map(|x| x.abs()).sum::<f64>(),
            PNorm::Two => (dt * signal.iter().map(|x| x * x).sum::<f64>()).sqrt(),
            PNorm::Inf => signal.iter().map(|x| x.abs()).fold(0.0, f64::max),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PNorm::One => "L1",
            PNorm::Two => "L2",
            PNorm::Inf => "Linf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvectiveCheck {
    pub x1: f64,
    pub x2: f64,
    pub norm: PNorm,
    pub input_norm: f64,
    pub output_norm: f64,
    pub measured_ratio: f64,
    pub predicted_ratio: f64,
    pub gradient_input_norm: f64,
    pub gradient_output_norm: f64,
    pub gradient_ratio: f64,
}

impl ConvectiveCheck {
    /// `measured / predicted`.
    pub fn agreement(&self) -> f64 {
        self.measured_ratio / self.predicted_ratio
    }

    /// Strict decrease of both the speed and gradient norms.
    pub fn non_amplifying(&self) -> bool {
        self.output_norm < self.input_norm && self.gradient_output_norm < self.gradient_input_norm
    }
}

/// Drives the speed subsystem with `signal` at `x1` and compares the temporal
/// norms at `x2` with the analytic gain.
///
/// The input gradient follows from the transport equation,
/// `v_x(x1) = (v_t(x1) + k v(x1)) / c4`, using the differentiated signal; the
/// output gradient is a centred difference of the simulated field at `x2`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_convective_check(
    signal: &[f64],
    dt: f64,
    dx: f64,
    x1: f64,
    x2: f64,
    k: f64,
    c4: f64,
    norm: PNorm,
) -> Result<ConvectiveCheck> {
    let predicted = convective_gain(x1, x2, k, c4)?;
    if signal.iter().all(|&s| s == 0.0) {
        return Err(Error::ZeroInput);
    }
    let history = simulate_linear_speed_subsystem(k, c4, dx, dt, x1, signal)?;
    let j2 = (x2 / dx).round() as usize;
    if (j2 as f64 * dx - x2).abs() > 1e-9 * x1 {
        return Err(Error::InvalidParameter {
            name: "x2",
            reason: format!("{x2} m is not a grid node for dx = {dx} m"),
        });
    }
    let output: Vec<f64> = history.iter().map(|f| f[j2]).collect();
    let signal_t = crate::numerics::gradient(signal, dt);
    let grad_in: Vec<f64> = signal_t
        .iter()
        .zip(signal)
        .map(|(st, s)| (st + k * s) / c4)
        .collect();
    let grad_out: Vec<f64> = history
        .iter()
        .map(|f| {
            if j2 == 0 {
                (f[1] - f[0]) / dx
            } else {
                (f[j2 + 1] - f[j2 - 1]) / (2.0 * dx)
            }
        })
        .collect();
    let input_norm = norm.of(signal, dt);
    let output_norm = norm.of(&output, dt);
    let gradient_input_norm = norm.of(&grad_in, dt);
    let gradient_output_norm = norm.of(&grad_out, dt);
    Ok(ConvectiveCheck {
        x1,
        x2,
        norm,
        input_norm,
        output_norm,
        measured_ratio: output_norm / input_norm,
        predicted_ratio: predicted,
        gradient_input_norm,
        gradient_output_norm,
        gradient_ratio: gradient_output_norm / gradient_input_norm,
    })
}

/// Gaussian pulse `amplitude exp(-(t - center)^2 / (2 width^2))` sampled at `dt`.
pub fn gaussian_pulse(
    amplitude: f64,
    center: f64,
    width: f64,
    dt: f64,
    samples: usize,
) -> Vec<f64> {
    (0..samples)
        .map(|n| {
            let t = n as f64 * dt;
            amplitude * (-0.5 * ((t - center) / width).powi(2)).exp()
        })
        .collect()
}
