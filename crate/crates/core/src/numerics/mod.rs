//! Small dense numerics: linear solves, central-difference Jacobians,
//! damped Newton iteration, scalar root enumeration and log-log fits.
//!
//! Everything here is a pure function of its inputs. Systems handled by this
//! crate have at most a handful of unknowns per step, so dense `nalgebra`
//! storage is used throughout.

mod linalg;
mod newton;
mod roots;

pub use linalg::{fd_jacobian, linear_solve, null_space, singular_values};
pub use newton::{newton_solve, NewtonOutcome};
pub use roots::{enumerate_scalar_roots, loglog_slope};

use crate::error::{Error, Result};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

/// Tolerances for the Newton step solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    /// Residual infinity-norm accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Central-difference step used for Newton Jacobians.
    pub fd_epsilon: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 50,
            fd_epsilon: 1e-7,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.fd_epsilon > 0.0) || !self.fd_epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fd_epsilon must be positive, got {}",
                self.fd_epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Maximum absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn ensure_finite(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}
