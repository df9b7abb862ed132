use std::sync::Arc;

use super::{ConfigPair, DiscreteLagrangian, DiscreteSystem};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

type StateFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
type StateGradientFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
type SecondOrderResidualFn = Arc<dyn Fn(&Vector, &Vector, &Vector) -> Result<Vector> + Send + Sync>;
type SecondOrderBasisFn = Arc<dyn Fn(&Vector, &Vector, &Vector) -> Result<Matrix> + Send + Sync>;

/// A Lagrangian on `TQ` with constraints on position, velocity and
/// acceleration.
#[derive(Clone)]
pub struct ContinuousSystem {
    pub name: String,
    pub dim: usize,
    lagrangian: StateFn,
    gradients: Option<(StateGradientFn, StateGradientFn)>,
    kinematic_dim: usize,
    kinematic: SecondOrderResidualFn,
    variational_dim: usize,
    variational_basis: SecondOrderBasisFn,
    coordinate_names: Vec<String>,
}

impl ContinuousSystem {
    pub fn new<L>(name: impl Into<String>, dim: usize, lagrangian: L) -> Self
    where
        L: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    {
        let identity = Matrix::identity(dim, dim);
        Self {
            name: name.into(),
            dim,
            lagrangian: Arc::new(lagrangian),
            gradients: None,
            kinematic_dim: 0,
            kinematic: Arc::new(|_, _, _| Ok(Vector::zeros(0))),
            variational_dim: dim,
            variational_basis: Arc::new(move |_, _, _| Ok(identity.clone())),
            coordinate_names: (0..dim).map(|i| format!("q{i}")).collect(),
        }
    }

    /// Analytic `dL/dq` and `dL/dqdot`.
    pub fn with_gradients<A, B>(mut self, d_position: A, d_velocity: B) -> Self
    where
        A: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
        B: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        self.gradients = Some((Arc::new(d_position), Arc::new(d_velocity)));
        self
    }

    pub fn with_kinematic<F>(mut self, components: usize, residual: F) -> Self
    where
        F: Fn(&Vector, &Vector, &Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        self.kinematic_dim = components;
        self.kinematic = Arc::new(residual);
        self
    }

    pub fn with_variational<F>(mut self, columns: usize, basis: F) -> Self
    where
        F: Fn(&Vector, &Vector, &Vector) -> Result<Matrix> + Send + Sync + 'static,
    {
        self.variational_dim = columns;
        self.variational_basis = Arc::new(basis);
        self
    }

    pub fn with_coordinate_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.coordinate_names = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn lagrangian(&self, q: &Vector, qdot: &Vector) -> f64 {
        (self.lagrangian)(q, qdot)
    }

    pub fn kinematic_residual(&self, q: &Vector, qdot: &Vector, qddot: &Vector) -> Result<Vector> {
        (self.kinematic)(q, qdot, qddot)
    }
}

/// Position, central velocity and central acceleration at `q1`.
fn second_order_image(q0: &Vector, q1: &Vector, q2: &Vector, h: f64) -> (Vector, Vector, Vector) {
    let vel = (q2 - q0) / (2.0 * h);
    let acc = (q2 - q1 * 2.0 + q0) / (h * h);
    (q1.clone(), vel, acc)
}

/// Builds the discrete system with
/// `L_d(q0, q1) = h L(q0, (q1 - q0) / h)` and constraints evaluated at
/// `(q1, (q2 - q0) / 2h, (q2 - 2 q1 + q0) / h^2)`.
pub fn discretize(cont: &ContinuousSystem, h: f64) -> Result<DiscreteSystem> {
    if !(h.is_finite() && h != 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be finite and nonzero, got {h}")));
    }
    let l = cont.lagrangian.clone();
    let value = move |q0: &Vector, q1: &Vector| h * l(q0, &((q1 - q0) / h));
    let lagrangian = match &cont.gradients {
        Some((dq, dv)) => {
            let (dq1, dv1, dv2) = (dq.clone(), dv.clone(), dv.clone());
            DiscreteLagrangian::new(value).with_derivatives(
                move |q0: &Vector, q1: &Vector| {
                    let vel = (q1 - q0) / h;
                    dq1(q0, &vel) * h - dv1(q0, &vel)
                },
                move |q0: &Vector, q1: &Vector| dv2(q0, &((q1 - q0) / h)),
            )
        }
        None => DiscreteLagrangian::new(value),
    };

    let kin = cont.kinematic.clone();
    let basis = cont.variational_basis.clone();
    DiscreteSystem::builder(cont.dim, h, lagrangian)?
        .name(format!("{} (discretized)", cont.name))
        .kinematic(cont.kinematic_dim, move |q0, q1, q2| {
            let (q, v, a) = second_order_image(q0, q1, q2, h);
            kin(&q, &v, &a)
        })
        .variational(cont.variational_dim, move |q0, q1, q2| {
            let (q, v, a) = second_order_image(q0, q1, q2, h);
            basis(&q, &v, &a)
        })
        .coordinate_names(cont.coordinate_names.clone())
        .build()
}

/// Turns a discrete nonholonomic system (first order constraint `dd(q, q') = 0`,
/// admissible variations spanned by `distribution(q)`) into a discrete
/// second order system.
///
/// The kinematic residual is `(dd(q0, q1), dd(q1, q2))`; its first block is a
/// condition on the current pair. Constraint counts are not checked here.
#[allow(clippy::too_many_arguments)]
pub fn from_discrete_nonholonomic<R, B>(
    name: impl Into<String>,
    dim: usize,
    h: f64,
    lagrangian: DiscreteLagrangian,
    constraint_dim: usize,
    dd_residual: R,
    distribution_dim: usize,
    distribution_basis: B,
) -> Result<DiscreteSystem>
where
    R: Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync + 'static,
    B: Fn(&Vector) -> Result<Matrix> + Send + Sync + 'static,
{
    DiscreteSystem::builder(dim, h, lagrangian)?
        .name(name)
        .kinematic(2 * constraint_dim, move |q0, q1, q2| {
            let first = dd_residual(q0, q1)?;
            let second = dd_residual(q1, q2)?;
            let mut out = Vector::zeros(first.len() + second.len());
            out.rows_mut(0, first.len()).copy_from(&first);
            out.rows_mut(first.len(), second.len()).copy_from(&second);
            Ok(out)
        })
        .precondition_rows(constraint_dim)
        .variational(distribution_dim, move |_, q1, _| distribution_basis(q1))
        .build_unchecked()
}

/// First-order seed `(q, q + h qdot)` from continuous initial data.
pub fn seed_from_continuous(q: &Vector, qdot: &Vector, h: f64) -> Result<ConfigPair> {
    if q.len() != qdot.len() {
        return Err(Error::DimensionMismatch(format!(
            "position has length {}, velocity {}",
            q.len(),
            qdot.len()
        )));
    }
    Ok(ConfigPair::new(q.clone(), q + qdot * h))
}
