use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} = {value} is outside the congested-regime domain")]
    Domain { what: &'static str, value: f64 },

    #[error("infeasible operating point: {0}")]
    Infeasible(String),

    #[error("equilibrium profile ODE is singular at v = 0")]
    Singular,

    #[error("penetration rate is zero: the time-gap input has no control authority")]
    NoAuthority,

    #[error("CFL number {cfl:.4} exceeds limit {limit} at step {step}")]
    Cfl { step: usize, cfl: f64, limit: f64 },

    #[error("state left the admissible region at step {step}, node {node} (x = {x} m): rho = {rho}, v = {v}, h_acc = {h_acc}")]
    RegionExit {
        step: usize,
        node: usize,
        x: f64,
        rho: f64,
        v: f64,
        h_acc: f64,
    },

    #[error("extrapolated inlet speed {speed} is not positive at step {step}")]
    Boundary { step: usize, speed: f64 },

    #[error("no sign change of the characteristic function on (0, {ceiling}]")]
    NoSignChange { ceiling: f64 },

    #[error("need at least {needed} time samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("input signal is identically zero; gain ratio undefined")]
    ZeroInput,

    #[error("unknown plot kind `{0}`")]
    UnknownPlotKind(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::Domain { .. }
            | Error::Infeasible(_)
            | Error::NoAuthority
            | Error::Parse { .. }
            | Error::Config(_)
            | Error::UnknownPlotKind(_)
            | Error::GridMismatch(_) => 2,
            _ => 3,
        }
    }
}
