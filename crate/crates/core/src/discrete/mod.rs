//! Discrete second order constrained Lagrangian systems.
//!
//! A [`DiscreteSystem`] bundles a discrete Lagrangian `L_d(q0, q1)`, a
//! kinematic residual whose zero set is the set of admissible triples
//! `(q0, q1, q2)`, and a basis-valued map spanning the admissible variations
//! at `q1`. A discrete path is a trajectory exactly when every consecutive
//! triple lies on the kinematic constraint and the force balance `beta`
//! vanishes.
//!
//! Derivatives of `L_d` fall back to central differences unless the system
//! supplies analytic formulas.

mod construct;
mod stepping;

pub use construct::{discretize, from_discrete_nonholonomic, seed_from_continuous, ContinuousSystem};
pub use stepping::{ConfigPair, Selection, StepRecord, StepperConfig, Trajectory};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{Matrix, Vector};

pub type ScalarPairFn = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
pub type PairGradientFn = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type TripleResidualFn = Arc<dyn Fn(&Vector, &Vector, &Vector) -> Result<Vector> + Send + Sync>;
pub type TripleBasisFn = Arc<dyn Fn(&Vector, &Vector, &Vector) -> Result<Matrix> + Send + Sync>;
pub type CustomStepFn =
    Arc<dyn Fn(&DiscreteSystem, &ConfigPair, &StepperConfig) -> Result<(Vector, StepRecord)> + Send + Sync>;

/// Relative step of the five-point central stencil used for derivatives of `L_d`.
const LAGRANGIAN_FD_STEP: f64 = 1e-3;

pub(crate) fn fd_step(x: f64) -> f64 {
    LAGRANGIAN_FD_STEP * (1.0 + x.abs())
}

/// A discrete Lagrangian with optional analytic partial derivatives.
#[derive(Clone)]
pub struct DiscreteLagrangian {
    value: ScalarPairFn,
    d1: Option<PairGradientFn>,
    d2: Option<PairGradientFn>,
}

impl DiscreteLagrangian {
    pub fn new<F>(value: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            d1: None,
            d2: None,
        }
    }

    /// Supplies `D1 L_d` and `D2 L_d` in closed form.
    pub fn with_derivatives<A, B>(mut self, d1: A, d2: B) -> Self
    where
        A: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
        B: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        self.d1 = Some(Arc::new(d1));
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.d1.is_some() && self.d2.is_some()
    }

    pub fn eval(&self, q: &Vector, q_next: &Vector) -> f64 {
        (self.value)(q, q_next)
    }

    /// Partial derivative with respect to the first argument.
    pub fn d1(&self, q: &Vector, q_next: &Vector) -> Vector {
        match &self.d1 {
            Some(d) => d(q, q_next),
            None => self.central_gradient(q, |x| self.eval(x, q_next)),
        }
    }

    /// Partial derivative with respect to the second argument.
    pub fn d2(&self, q: &Vector, q_next: &Vector) -> Vector {
        match &self.d2 {
            Some(d) => d(q, q_next),
            None => self.central_gradient(q_next, |x| self.eval(q, x)),
        }
    }

    fn central_gradient<F: Fn(&Vector) -> f64>(&self, at: &Vector, f: F) -> Vector {
        let mut probe = at.clone();
        Vector::from_iterator(
            at.len(),
            (0..at.len()).map(|i| {
                let eps = fd_step(at[i]);
                let mut sample = |offset: f64| {
                    probe[i] = at[i] + offset;
                    f(&probe)
                };
                let d = (8.0 * (sample(eps) - sample(-eps)) - (sample(2.0 * eps) - sample(-2.0 * eps))) / (12.0 * eps);
                probe[i] = at[i];
                d
            }),
        )
    }
}

/// Discrete Lagrangian, kinematic constraint and variational constraints on
/// `Q = R^n`, together with the time step.
///
/// The first `precondition_rows` components of the kinematic residual may
/// depend only on `(q0, q1)`; they must already vanish at the current state
/// and are not solved for during a step. The remaining components, together
/// with the `variational_dim` components of `beta`, must number exactly `n`.
#[derive(Clone)]
pub struct DiscreteSystem {
    name: String,
    dim: usize,
    h: f64,
    lagrangian: DiscreteLagrangian,
    kinematic_dim: usize,
    precondition_rows: usize,
    kinematic: TripleResidualFn,
    variational_dim: usize,
    variational_basis: TripleBasisFn,
    custom_step: Option<CustomStepFn>,
    coordinate_names: Vec<String>,
}

impl fmt::Debug for DiscreteSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteSystem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("h", &self.h)
            .field("kinematic_dim", &self.kinematic_dim)
            .field("precondition_rows", &self.precondition_rows)
            .field("variational_dim", &self.variational_dim)
            .field("custom_step", &self.custom_step.is_some())
            .finish()
    }
}

pub struct DiscreteSystemBuilder {
    system: DiscreteSystem,
}

impl DiscreteSystemBuilder {
    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.system.name = name.into();
        self
    }

    pub fn kinematic<F>(mut self, components: usize, residual: F) -> Self
    where
        F: Fn(&Vector, &Vector, &Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        self.system.kinematic_dim = components;
        self.system.kinematic = Arc::new(residual);
        self
    }

    /// Marks the leading `rows` kinematic components as conditions on the
    /// current pair only.
    pub fn precondition_rows(mut self, rows: usize) -> Self {
        self.system.precondition_rows = rows;
        self
    }

    pub fn variational<F>(mut self, columns: usize, basis: F) -> Self
    where
        F: Fn(&Vector, &Vector, &Vector) -> Result<Matrix> + Send + Sync + 'static,
    {
        self.system.variational_dim = columns;
        self.system.variational_basis = Arc::new(basis);
        self
    }

    pub fn custom_step(mut self, stepper: CustomStepFn) -> Self {
        self.system.custom_step = Some(stepper);
        self
    }

    pub fn coordinate_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.system.coordinate_names = names.into_iter().map(Into::into).collect();
        self
    }

    /// Builds the system, rejecting ill-posed constraint counts.
    pub fn build(self) -> Result<DiscreteSystem> {
        let system = self.build_unchecked()?;
        system.check_well_posed()?;
        Ok(system)
    }

    /// Builds without checking constraint counts; ill-posed systems then fail
    /// when stepped.
    pub fn build_unchecked(self) -> Result<DiscreteSystem> {
        let s = &self.system;
        if s.coordinate_names.len() != s.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinate names for dimension {}",
                s.coordinate_names.len(),
                s.dim
            )));
        }
        if s.precondition_rows > s.kinematic_dim {
            return Err(Error::InvalidParameter(format!(
                "{} precondition rows exceed {} kinematic components",
                s.precondition_rows, s.kinematic_dim
            )));
        }
        Ok(self.system)
    }
}

impl DiscreteSystem {
    /// Starts an unconstrained system: no kinematic constraint and the full
    /// tangent space as admissible variations.
    pub fn builder(dim: usize, h: f64, lagrangian: DiscreteLagrangian) -> Result<DiscreteSystemBuilder> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !(h.is_finite() && h != 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be finite and nonzero, got {h}")));
        }
        let identity = Matrix::identity(dim, dim);
        Ok(DiscreteSystemBuilder {
            system: DiscreteSystem {
                name: "unnamed".into(),
                dim,
                h,
                lagrangian,
                kinematic_dim: 0,
                precondition_rows: 0,
                kinematic: Arc::new(|_, _, _| Ok(Vector::zeros(0))),
                variational_dim: dim,
                variational_basis: Arc::new(move |_, _, _| Ok(identity.clone())),
                custom_step: None,
                coordinate_names: (0..dim).map(|i| format!("q{i}")).collect(),
            },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lagrangian(&self) -> &DiscreteLagrangian {
        &self.lagrangian
    }

    pub fn kinematic_dim(&self) -> usize {
        self.kinematic_dim
    }

    pub fn precondition_rows(&self) -> usize {
        self.precondition_rows
    }

    pub fn variational_dim(&self) -> usize {
        self.variational_dim
    }

    pub fn coordinate_names(&self) -> &[String] {
        &self.coordinate_names
    }

    pub fn has_custom_step(&self) -> bool {
        self.custom_step.is_some()
    }

    /// The same system stepped by plain Newton iteration.
    pub fn without_custom_step(&self) -> Self {
        Self {
            custom_step: None,
            ..self.clone()
        }
    }

    pub fn with_coordinate_names<S: Into<String>>(self, names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinate names for dimension {}",
                names.len(),
                self.dim
            )));
        }
        Ok(Self {
            coordinate_names: names,
            ..self
        })
    }

    pub fn check_well_posed(&self) -> Result<()> {
        let active = self.kinematic_dim - self.precondition_rows;
        if active + self.variational_dim != self.dim {
            return Err(Error::IllPosed {
                kinematic: active,
                variational: self.variational_dim,
                dim: self.dim,
            });
        }
        Ok(())
    }

    pub(crate) fn check_len(&self, v: &Vector, what: &str) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{what} has length {}, system dimension is {}",
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn discrete_lagrangian(&self, q: &Vector, q_next: &Vector) -> f64 {
        self.lagrangian.eval(q, q_next)
    }

    /// Momentum at `q` from the pair `(q, q')`: `-D1 L_d(q, q')`.
    pub fn legendre_minus(&self, q: &Vector, q_next: &Vector) -> Result<Vector> {
        self.check_len(q, "q")?;
        self.check_len(q_next, "q'")?;
        Ok(-self.lagrangian.d1(q, q_next))
    }

    /// Momentum at `q'` from the pair `(q, q')`: `D2 L_d(q, q')`.
    pub fn legendre_plus(&self, q: &Vector, q_next: &Vector) -> Result<Vector> {
        self.check_len(q, "q")?;
        self.check_len(q_next, "q'")?;
        Ok(self.lagrangian.d2(q, q_next))
    }

    pub fn kinematic_residual(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Vector> {
        let r = (self.kinematic)(q0, q1, q2)?;
        if r.len() != self.kinematic_dim {
            return Err(Error::DimensionMismatch(format!(
                "kinematic residual has {} components, declared {}",
                r.len(),
                self.kinematic_dim
            )));
        }
        Ok(r)
    }

    pub fn variational_basis(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Matrix> {
        let b = (self.variational_basis)(q0, q1, q2)?;
        if b.nrows() != self.dim || b.ncols() != self.variational_dim {
            return Err(Error::DimensionMismatch(format!(
                "variational basis is {}x{}, expected {}x{}",
                b.nrows(),
                b.ncols(),
                self.dim,
                self.variational_dim
            )));
        }
        Ok(b)
    }

    /// The momentum mismatch `F+ L_d(q0, q1) - F- L_d(q1, q2)` at `q1`,
    /// i.e. `D2 L_d(q0, q1) + D1 L_d(q1, q2)`.
    pub fn momentum_mismatch(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Vector> {
        Ok(self.legendre_plus(q0, q1)? - self.legendre_minus(q1, q2)?)
    }

    /// Force balance: the momentum mismatch paired with each admissible
    /// variation direction.
    pub fn beta_residual(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Vector> {
        for (v, what) in [(q0, "q0"), (q1, "q1"), (q2, "q2")] {
            self.check_len(v, what)?;
        }
        let basis = self.variational_basis(q0, q1, q2)?;
        let mismatch = self.momentum_mismatch(q0, q1, q2)?;
        Ok(basis.transpose() * mismatch)
    }

    /// Kinematic residual followed by `beta`; zero exactly on trajectory
    /// triples.
    pub fn step_residual(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Vector> {
        let kin = self.kinematic_residual(q0, q1, q2)?;
        let beta = self.beta_residual(q0, q1, q2)?;
        let mut out = Vector::zeros(kin.len() + beta.len());
        out.rows_mut(0, kin.len()).copy_from(&kin);
        out.rows_mut(kin.len(), beta.len()).copy_from(&beta);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn free_1d(h: f64) -> DiscreteSystem {
        let lag = DiscreteLagrangian::new(move |a: &Vector, b: &Vector| (b - a).norm_squared() / (2.0 * h));
        DiscreteSystem::builder(1, h, lag).unwrap().build().unwrap()
    }

    #[test]
    fn legendre_of_free_particle() {
        let sys = free_1d(0.5);
        let m = sys.legendre_minus(&v(&[0.0]), &v(&[1.0])).unwrap();
        let p = sys.legendre_plus(&v(&[0.0]), &v(&[1.0])).unwrap();
        assert!((m[0] - 2.0).abs() < 1e-9);
        assert!((p[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn legendre_of_constant_is_zero() {
        let sys = DiscreteSystem::builder(2, 0.1, DiscreteLagrangian::new(|_, _| 3.5))
            .unwrap()
            .build()
            .unwrap();
        let m = sys.legendre_minus(&v(&[1.0, 2.0]), &v(&[3.0, 4.0])).unwrap();
        assert_eq!(m.amax(), 0.0);
    }

    #[test]
    fn legendre_plus_of_product() {
        let sys = DiscreteSystem::builder(1, 1.0, DiscreteLagrangian::new(|a: &Vector, b: &Vector| a[0] * b[0]))
            .unwrap()
            .build()
            .unwrap();
        let p = sys.legendre_plus(&v(&[3.0]), &v(&[7.0])).unwrap();
        assert!((p[0] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn beta_of_free_particle() {
        let sys = free_1d(1.0);
        let on = sys.beta_residual(&v(&[0.0]), &v(&[1.0]), &v(&[2.0])).unwrap();
        let off = sys.beta_residual(&v(&[0.0]), &v(&[1.0]), &v(&[3.0])).unwrap();
        assert!(on[0].abs() < 1e-9);
        assert!((off[0] + 1.0).abs() < 1e-9);
        // No kinematic part: the step residual is beta alone.
        let res = sys.step_residual(&v(&[0.0]), &v(&[1.0]), &v(&[3.0])).unwrap();
        assert_eq!(res.len(), 1);
        assert!((res[0] - off[0]).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = free_1d(1.0);
        let err = sys.beta_residual(&v(&[0.0, 1.0]), &v(&[1.0]), &v(&[2.0])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn ill_posed_counts_rejected() {
        let lag = DiscreteLagrangian::new(|_, _| 0.0);
        let err = DiscreteSystem::builder(2, 0.1, lag)
            .unwrap()
            .kinematic(1, |_, _, _| Ok(Vector::zeros(1)))
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::IllPosed { .. }));
    }

    #[test]
    fn zero_step_rejected() {
        assert!(DiscreteSystem::builder(1, 0.0, DiscreteLagrangian::new(|_, _| 0.0)).is_err());
    }

    #[test]
    fn analytic_and_numeric_derivatives_agree() {
        let h = 0.3;
        let value = move |a: &Vector, b: &Vector| (b - a).norm_squared() / (2.0 * h) - h * a[0].cos() * b[1];
        let numeric = DiscreteLagrangian::new(value);
        let analytic = DiscreteLagrangian::new(value).with_derivatives(
            move |a: &Vector, b: &Vector| -(b - a) / h + v(&[h * a[0].sin() * b[1], 0.0]),
            move |a: &Vector, b: &Vector| (b - a) / h - v(&[0.0, h * a[0].cos()]),
        );
        let (a, b) = (v(&[0.4, -1.2]), v(&[0.9, 0.3]));
        assert!((numeric.d1(&a, &b) - analytic.d1(&a, &b)).amax() < 1e-9);
        assert!((numeric.d2(&a, &b) - analytic.d2(&a, &b)).amax() < 1e-9);
    }
}
