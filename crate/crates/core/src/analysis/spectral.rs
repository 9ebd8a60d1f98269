//! Real unstable eigenvalue of the open-loop linearisation.
//!
//! For real `sigma >= 0` the characteristic equation reduces to
//! `f(sigma) = a2 sigma^2 - a1 (sigma + c2) exp(-sigma tau D)`, with
//! `f(0) = -a1 c2 < 0` and `f -> +inf`, so a positive root always exists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearization::LinearCoeffs;

/// Largest `sigma` searched before the coefficients are presumed wrong [1/s].
pub const SIGMA_CEILING: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub sigma_star: f64,
    /// Bracket `(lo, hi)` with `f(lo) < 0 < f(hi)` that seeded the bisection.
    pub bracket: (f64, f64),
    /// `|f(sigma_star)|`.
    pub residual: f64,
    /// Residual relative to the magnitude of the two terms of `f`.
    pub relative_residual: f64,
    pub iterations: usize,
}

pub fn characteristic_fn(sigma: f64, lc: &LinearCoeffs, length: f64) -> f64 {
    lc.a2 * sigma * sigma - lc.a1 * (sigma + lc.c2) * (-sigma * lc.tau_char * length).exp()
}

/// Geometric bracket expansion from the natural scale `1/(tau D)`, then
/// bisection to machine precision.
pub fn find_unstable_root(lc: &LinearCoeffs, length: f64) -> Result<SpectralResult> {
    let f = |s: f64| characteristic_fn(s, lc, length);
    let no_root = || Error::NoSignChange {
        ceiling: SIGMA_CEILING,
    };
    if !(f(0.0) < 0.0) {
        return Err(no_root());
    }
    let mut hi = (1.0 / (lc.tau_char * length)).min(SIGMA_CEILING);
    while !(f(hi) > 0.0) {
        if hi >= SIGMA_CEILING {
            return Err(no_root());
        }
        hi = (2.0 * hi).min(SIGMA_CEILING);
    }
    let bracket = (0.0, hi);
    let (mut lo, mut hi) = bracket;
    let mut iterations = 0;
    while iterations < 2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let sigma_star = if f(hi).abs() < f(lo).abs() { hi } else { lo };
    let residual = f(sigma_star).abs();
    let scale = lc.a2 * sigma_star * sigma_star
        + lc.a1 * (sigma_star + lc.c2) * (-sigma_star * lc.tau_char * length).exp();
    Ok(SpectralResult {
        sigma_star,
        bracket,
        residual,
        relative_residual: residual / scale,
        iterations,
    })
}
