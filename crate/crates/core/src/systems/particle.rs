//! Planar particle forced to follow a prescribed signed curvature.

use std::fmt;
use std::sync::Arc;

use crate::discrete::{ConfigPair, ContinuousSystem, DiscreteLagrangian, DiscreteSystem};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// Below this discrete speed the curvature quotient is undefined.
pub const MIN_SPEED: f64 = 1e-10;

pub type CurvatureFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ParticleParams {
    pub mass: f64,
    pub curvature: CurvatureFn,
    /// Time step. A negative value gives the time-reversed integrator.
    pub h: f64,
}

impl fmt::Debug for ParticleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParticleParams")
            .field("mass", &self.mass)
            .field("h", &self.h)
            .finish_non_exhaustive()
    }
}

impl ParticleParams {
    pub fn constant_curvature(k: f64, mass: f64, h: f64) -> Self {
        Self {
            mass,
            curvature: Arc::new(move |_, _| k),
            h,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.h.is_finite() && self.h != 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be nonzero, got {}", self.h)));
        }
        Ok(())
    }

    pub fn with_step(&self, h: f64) -> Self {
        Self { h, ..self.clone() }
    }
}

impl Default for ParticleParams {
    /// Unit curvature, unit mass, `h = 0.1`.
    fn default() -> Self {
        Self::constant_curvature(1.0, 1.0, 0.1)
    }
}

/// Signed curvature of a path with velocity `v` and acceleration `a`.
pub fn signed_curvature(v: (f64, f64), a: (f64, f64)) -> Result<f64> {
    let speed = v.0.hypot(v.1);
    if speed < MIN_SPEED {
        return Err(Error::VelocityDegeneracy { speed });
    }
    Ok((v.0 * a.1 - a.0 * v.1) / speed.powi(3))
}

/// The discrete particle: `L_d = m |q1 - q0|^2 / 2h`, curvature prescribed
/// through central differences at `q1`, variations along the central
/// velocity.
pub fn make_particle(params: &ParticleParams) -> Result<DiscreteSystem> {
    params.validate()?;
    let (m, h) = (params.mass, params.h);
    let lagrangian = DiscreteLagrangian::new(move |q0: &Vector, q1: &Vector| m * (q1 - q0).norm_squared() / (2.0 * h))
        .with_derivatives(move |q0: &Vector, q1: &Vector| -(q1 - q0) * (m / h), move |q0: &Vector, q1: &Vector| (q1 - q0) * (m / h));
    let k = params.curvature.clone();
    DiscreteSystem::builder(2, h, lagrangian)?
        .name("particle")
        .kinematic(1, move |q0, q1, q2| {
            let v = ((q2[0] - q0[0]) / (2.0 * h), (q2[1] - q0[1]) / (2.0 * h));
            let a = ((q2[0] - 2.0 * q1[0] + q0[0]) / (h * h), (q2[1] - 2.0 * q1[1] + q0[1]) / (h * h));
            Ok(Vector::from_element(1, signed_curvature(v, a)? - k(q1[0], q1[1])))
        })
        .variational(1, move |q0, _, q2| {
            Ok(Matrix::from_column_slice(2, 1, &[(q2[0] - q0[0]) / (2.0 * h), (q2[1] - q0[1]) / (2.0 * h)]))
        })
        .coordinate_names(["x", "y"])
        .build()
}

/// The continuous system the discrete particle is derived from.
pub fn particle_continuous(params: &ParticleParams) -> Result<ContinuousSystem> {
    params.validate()?;
    let m = params.mass;
    let k = params.curvature.clone();
    Ok(ContinuousSystem::new("particle", 2, move |_, qd: &Vector| 0.5 * m * qd.norm_squared())
        .with_gradients(|_, _| Vector::zeros(2), move |_, qd: &Vector| qd * m)
        .with_kinematic(1, move |q, qd, qdd| {
            Ok(Vector::from_element(1, signed_curvature((qd[0], qd[1]), (qdd[0], qdd[1]))? - k(q[0], q[1])))
        })
        .with_variational(1, |_, qd, _| Ok(Matrix::from_column_slice(2, 1, qd.as_slice())))
        .with_coordinate_names(["x", "y"]))
}

/// Seed `((0, 0), (h, h))`: the origin with unit velocity along both axes.
pub fn particle_seed(h: f64) -> ConfigPair {
    ConfigPair::new(Vector::from_vec(vec![0.0, 0.0]), Vector::from_vec(vec![h, h]))
}
