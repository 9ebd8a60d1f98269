//! Macroscopic model of mixed ACC/manual traffic on a freeway stretch, with
//! a boundary-free feedback law acting on the ACC time gap.
//!
//! The crate covers the nonlinear model and its equilibrium, the linearised
//! system, the feedback law, a finite-volume solver, stability analysis
//! tools and performance indices, plus scenario files and CSV export.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod analysis;
pub mod cli;
pub mod controller;
pub mod error;
pub mod linearization;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod solver;
pub mod state;

pub use controller::{feedback_law, ControlField, ControlGain};
pub use error::{Error, Result};
pub use linearization::{linear_coeffs, LinearCoeffs};
pub use model::{equilibrium, Equilibrium, ModelParams, ParamSet};
pub use solver::{simulate, Mode, SolverOptions, Trajectory};
pub use state::{Grid, TrafficState};
