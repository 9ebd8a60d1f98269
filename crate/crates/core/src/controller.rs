//! In-domain time-gap feedback.
//!
//! The law cancels the density coupling in the linearised speed equation and
//! replaces it with damping at rate `k`:
//!
//! ```text
//! h_acc = h_acc_bar + (-c1 rho_dev + (k - c2) v_dev) / c3
//! ```
//!
//! The applied field is clamped to `[h_min, h_max]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::LinearCoeffs;
use crate::model::{h_mix_unchecked, mixed_time_constant, Equilibrium, ModelParams};
use crate::state::TrafficState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlGain(f64);

impl ControlGain {
    pub fn new(k: f64) -> Result<Self> {
        if k > 0.0 && k.is_finite() {
            Ok(ControlGain(k))
        } else {
            Err(Error::InvalidParameter {
                name: "gain",
                reason: format!("must be finite and > 0, got {k}"),
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// ACC time-gap per grid node plus a flag for nodes where clamping occurred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlField {
    pub h_acc: Vec<f64>,
    pub saturated: Vec<bool>,
}

impl ControlField {
    pub fn uniform(h_acc: f64, nodes: usize) -> Self {
        ControlField {
            h_acc: vec![h_acc; nodes],
            saturated: vec![false; nodes],
        }
    }

    pub fn saturation_fraction(&self) -> f64 {
        if self.saturated.is_empty() {
            return 0.0;
        }
        self.saturated.iter().filter(|&&s| s).count() as f64 / self.saturated.len() as f64
    }

    pub fn range(&self) -> (f64, f64) {
        self.h_acc
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| {
                (lo.min(h), hi.max(h))
            })
    }
}

/// Unsaturated time-gap deviation for given density and speed deviations.
#[inline]
pub fn time_gap_deviation(rho_dev: f64, v_dev: f64, lc: &LinearCoeffs, k: f64) -> f64 {
    (-lc.c1 * rho_dev + (k - lc.c2) * v_dev) / lc.c3
}

pub fn feedback_law(
    state: &TrafficState,
    eq: &Equilibrium,
    lc: &LinearCoeffs,
    gain: ControlGain,
    p: &ModelParams,
) -> Result<ControlField> {
    if lc.c3 == 0.0 {
        return Err(Error::NoAuthority);
    }
    let k = gain.value();
    let (lo, hi) = (p.h_min(), p.h_max());
    let (h_acc, saturated) = state
        .rho
        .iter()
        .zip(&state.v)
        .map(|(&rho, &v)| {
            let h = eq.h_acc_bar + time_gap_deviation(rho - eq.rho_bar, v - eq.v_bar, lc, k);
            let clamped = h.clamp(lo, hi);
            (clamped, clamped != h)
        })
        .unzip();
    Ok(ControlField { h_acc, saturated })
}

/// Relaxation source `(V_mix(rho, h_acc) - v) / tau_mix` per node.
pub fn closed_loop_source(
    state: &TrafficState,
    control: &ControlField,
    p: &ModelParams,
) -> Vec<f64> {
    let tau_mix = mixed_time_constant(p);
    let l = p.vehicle_length();
    state
        .rho
        .iter()
        .zip(&state.v)
        .zip(&control.h_acc)
        .map(|((&rho, &v), &h)| ((1.0 / rho - l) / h_mix_unchecked(h, p) - v) / tau_mix)
        .collect()
}
