//! Small systems with known behavior, used by tests and the command line.

use crate::discrete::{from_discrete_nonholonomic, DiscreteLagrangian, DiscreteSystem};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

/// Normal of the nonholonomic test constraint `a . (q' - q) = 0`.
pub const CONSTRAINT_NORMAL: [f64; 2] = [1.0, 2.0];

/// Coupling of the holonomic test potential `1 - cos x + c x y`.
pub const LEAF_COUPLING: f64 = 0.5;

pub struct TestSystems {
    /// `L_d = |q1 - q0|^2 / 2h` on the plane.
    pub free: DiscreteSystem,
    /// `L_d = (q1 - q0)^2 / 2h - h q0^2 / 2` on the line.
    pub harmonic: DiscreteSystem,
    /// Planar particle in the potential `1 - cos x + y^2 / 2` with steps
    /// confined to `ker a`, `a` = [`CONSTRAINT_NORMAL`].
    pub nonholonomic: DiscreteSystem,
    /// Planar particle in `1 - cos x + c x y` confined to horizontal lines.
    pub holonomic: DiscreteSystem,
}

pub fn make_test_systems(h: f64) -> Result<TestSystems> {
    Ok(TestSystems {
        free: free_particle(h)?,
        harmonic: harmonic_oscillator(h)?,
        nonholonomic: nonholonomic_test(h)?,
        holonomic: holonomic_test(h)?,
    })
}

/// Looks a test system up by its command line name.
pub fn test_system_by_name(name: &str, h: f64) -> Result<DiscreteSystem> {
    match name {
        "free" => free_particle(h),
        "harmonic" => harmonic_oscillator(h),
        "nonholonomic-test" => nonholonomic_test(h),
        "holonomic-test" => holonomic_test(h),
        other => Err(Error::InvalidParameter(format!("unknown test system `{other}`"))),
    }
}

fn potential_lagrangian<V, G>(h: f64, potential: V, gradient: G) -> DiscreteLagrangian
where
    V: Fn(&Vector) -> f64 + Send + Sync + 'static,
    G: Fn(&Vector) -> Vector + Send + Sync + 'static,
{
    DiscreteLagrangian::new(move |q0: &Vector, q1: &Vector| (q1 - q0).norm_squared() / (2.0 * h) - h * potential(q0))
        .with_derivatives(
            move |q0: &Vector, q1: &Vector| -(q1 - q0) / h - gradient(q0) * h,
            move |q0: &Vector, q1: &Vector| (q1 - q0) / h,
        )
}

pub fn free_particle(h: f64) -> Result<DiscreteSystem> {
    let lag = potential_lagrangian(h, |_| 0.0, |q| Vector::zeros(q.len()));
    DiscreteSystem::builder(2, h, lag)?
        .name("free")
        .coordinate_names(["x", "y"])
        .build()
}

pub fn harmonic_oscillator(h: f64) -> Result<DiscreteSystem> {
    let lag = potential_lagrangian(h, |q| 0.5 * q[0] * q[0], |q| q.clone());
    DiscreteSystem::builder(1, h, lag)?
        .name("harmonic")
        .coordinate_names(["x"])
        .build()
}

pub fn nonholonomic_test(h: f64) -> Result<DiscreteSystem> {
    let [a0, a1] = CONSTRAINT_NORMAL;
    let lag = potential_lagrangian(
        h,
        |q| 1.0 - q[0].cos() + 0.5 * q[1] * q[1],
        |q| Vector::from_vec(vec![q[0].sin(), q[1]]),
    );
    let sys = from_discrete_nonholonomic(
        "nonholonomic-test",
        2,
        h,
        lag,
        1,
        move |q, q_next| Ok(Vector::from_element(1, a0 * (q_next[0] - q[0]) + a1 * (q_next[1] - q[1]))),
        1,
        move |_| Ok(Matrix::from_column_slice(2, 1, &[-a1, a0])),
    )?;
    with_names(sys, ["x", "y"])
}

pub fn holonomic_test(h: f64) -> Result<DiscreteSystem> {
    let lag = potential_lagrangian(
        h,
        |q| 1.0 - q[0].cos() + LEAF_COUPLING * q[0] * q[1],
        |q| Vector::from_vec(vec![q[0].sin() + LEAF_COUPLING * q[1], LEAF_COUPLING * q[0]]),
    );
    let sys = from_discrete_nonholonomic(
        "holonomic-test",
        2,
        h,
        lag,
        1,
        |q, q_next| Ok(Vector::from_element(1, q_next[1] - q[1])),
        1,
        |_| Ok(Matrix::from_column_slice(2, 1, &[1.0, 0.0])),
    )?;
    with_names(sys, ["x", "y"])
}

fn with_names(sys: DiscreteSystem, names: [&str; 2]) -> Result<DiscreteSystem> {
    sys.with_coordinate_names(names)
}
