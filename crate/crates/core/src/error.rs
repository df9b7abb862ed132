//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::discrete::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("log-log fit requires positive values, got {0}")]
    NonPositive(f64),

    #[error("ill-posed step: {kinematic} active kinematic equations + {variational} variational directions != dimension {dim}")]
    IllPosed {
        kinematic: usize,
        variational: usize,
        dim: usize,
    },

    #[error("discrete velocity degenerates (speed {speed:e})")]
    VelocityDegeneracy { speed: f64 },

    #[error("lyapunov constraint degenerates: velocity gradient norm {norm:e}")]
    ConstraintDegeneracy { norm: f64 },

    #[error("no root found in [{lo}, {hi}]")]
    NoRootFound { lo: f64, hi: f64 },

    #[error("ambiguous root selection between {first} and {second}")]
    AmbiguousRoot { first: f64, second: f64 },

    #[error("state is off the kinematic constraint (residual {residual:e})")]
    OffConstraint { residual: f64 },

    #[error("step {index} failed: {source}")]
    Flow {
        index: usize,
        #[source]
        source: Box<Error>,
        partial: Box<Trajectory>,
    },

    #[error("config error{}: {message}", at_line(*line))]
    Config { line: usize, message: String },

    #[error("csv error{}: {message}", at_line(*line))]
    Csv { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Line 0 marks input that did not come from a numbered line.
fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" at line {line}")
    }
}
