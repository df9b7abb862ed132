//! Variational integrators for discrete second order constrained Lagrangian
//! systems, with the planar prescribed-curvature particle and the Lyapunov
//! constrained inertia wheel pendulum as worked systems.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod discrete;
pub mod error;
pub mod io;
pub mod numerics;
pub mod reference;
pub mod systems;

pub use error::{Error, Result};
