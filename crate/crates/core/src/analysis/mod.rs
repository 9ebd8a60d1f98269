//! Executable versions of the stability results: open-loop spectral
//! instability, Lyapunov decay of the closed loop, the exponential C1
//! envelope, and convective stability of the speed subsystem.

mod convective;
mod envelope;
mod lyapunov;
mod spectral;

pub use convective::{
    convective_gain, empirical_convective_check, gaussian_pulse, ConvectiveCheck, PNorm,
};
pub use envelope::{c1_norm, decay_envelope, fit_decay_rate, EnvelopeReport};
pub use lyapunov::{
    certify_decay, functional_along, lyapunov_functional, lyapunov_gains, FunctionalValue,
    LyapunovGains, LyapunovReport,
};
pub use spectral::{characteristic_fn, find_unstable_root, SpectralResult, SIGMA_CEILING};

/// Discretisation slack for the Lyapunov decay check.
pub const TOL_DISCR: f64 = 5e-2;
