use crate::discrete::{ConfigPair, DiscreteSystem, StepperConfig};
use crate::error::{Error, Result};
use crate::numerics::{fd_jacobian, Matrix, Vector};

/// Coefficients of a two-form on `Q x Q` in the coordinates
/// `(dq0, dq1)`: the form evaluated on `(u, v)` is `u^T M v`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormMatrix(pub Matrix);

impl FormMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    /// Number of configuration coordinates (half the matrix size).
    pub fn half_size(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn norm(&self) -> f64 {
        matrix_inf_norm(&self.0)
    }

    /// `|M + M^T|_inf / |M|_inf`, zero for the zero form.
    pub fn antisymmetry_error(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return 0.0;
        }
        matrix_inf_norm(&(&self.0 + self.0.transpose())) / n
    }

    /// Largest entry of the `(dq0, dq0)` and `(dq1, dq1)` blocks.
    pub fn diagonal_block_size(&self) -> f64 {
        let n = self.half_size();
        self.0.view((0, 0), (n, n)).amax().max(self.0.view((n, n), (n, n)).amax())
    }

    /// The `(dq0, dq1)` block.
    pub fn mixed_block(&self) -> Matrix {
        let n = self.half_size();
        self.0.view((0, n), (n, n)).into_owned()
    }

    pub fn eval(&self, u: &Vector, v: &Vector) -> f64 {
        u.dot(&(&self.0 * v))
    }
}

/// Induced infinity norm (largest absolute row sum).
pub fn matrix_inf_norm(m: &Matrix) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// The discrete Lagrangian two-form `-d theta+` at `(q, q_next)`.
///
/// With `A = d^2 L_d / dq dq_next` the coefficient matrix is
/// `[[0, -A], [A^T, 0]]`.
pub fn omega_ld(sys: &DiscreteSystem, q: &Vector, q_next: &Vector) -> Result<FormMatrix> {
    let n = sys.dim();
    if q.len() != n || q_next.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "omega needs two points of dimension {n}, got {} and {}",
            q.len(),
            q_next.len()
        )));
    }
    let eps = 1e-5 * (1.0 + q.amax());
    // Row j, column i holds d/dq_i of D2 L_d component j.
    let m = fd_jacobian(|x: &Vector| Ok(sys.lagrangian().d2(x, q_next)), q, eps)?;
    let mixed = m.transpose();
    let mut out = Matrix::zeros(2 * n, 2 * n);
    out.view_mut((0, n), (n, n)).copy_from(&(-&mixed));
    out.view_mut((n, 0), (n, n)).copy_from(&mixed.transpose());
    Ok(FormMatrix(out))
}

/// Covector `D2 L_d(q0, q1) + D1 L_d(q1, q2)` at `q1`, with `q2` from one step.
pub fn xi_covector(sys: &DiscreteSystem, state: &ConfigPair, cfg: &StepperConfig) -> Result<(Vector, Vector)> {
    let (q2, _) = sys.step(state, cfg)?;
    let c = sys.momentum_mismatch(&state.q_prev, &state.q_curr, &q2)?;
    Ok((q2, c))
}

/// The correction one-form `xi` at `state` applied to `(dq0, dq1)`.
///
/// Only `dq1` enters; `dq0` is accepted so the form is evaluated on full
/// tangent vectors of `Q x Q`.
pub fn xi_form(sys: &DiscreteSystem, state: &ConfigPair, cfg: &StepperConfig, dq0: &Vector, dq1: &Vector) -> Result<f64> {
    let n = sys.dim();
    if dq0.len() != n || dq1.len() != n {
        return Err(Error::DimensionMismatch(format!("tangent vectors must have dimension {n}")));
    }
    let (_, c) = xi_covector(sys, state, cfg)?;
    Ok(c.dot(dq1))
}

/// Outcome of comparing the pulled back two-form with `Omega + d xi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymplecticCheck {
    /// `|J^T Omega(q1, q2) J - Omega(q0, q1) - d xi| / |Omega(q0, q1)|`.
    pub residual: f64,
    /// `|d xi| / |Omega(q0, q1)|`.
    pub xi_term: f64,
    /// `|J^T Omega(q1, q2) J - Omega(q0, q1)| / |Omega(q0, q1)|`.
    pub defect: f64,
}

/// Checks the evolution identity of the discrete two-form over all of
/// `Q x Q`.
pub fn check_symplectic_evolution(sys: &DiscreteSystem, state: &ConfigPair, cfg: &StepperConfig) -> Result<SymplecticCheck> {
    let n = sys.dim();
    check_symplectic_evolution_restricted(sys, state, cfg, &Matrix::identity(2 * n, 2 * n))
}

/// Same check restricted to the span of the columns of `tangent`, a
/// constant basis of directions in `(dq0, dq1)` coordinates along which
/// the state may be moved.
pub fn check_symplectic_evolution_restricted(
    sys: &DiscreteSystem,
    state: &ConfigPair,
    cfg: &StepperConfig,
    tangent: &Matrix,
) -> Result<SymplecticCheck> {
    let n = sys.dim();
    if tangent.nrows() != 2 * n || tangent.ncols() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "tangent basis must be {} x r with r >= 1, got {} x {}",
            2 * n,
            tangent.nrows(),
            tangent.ncols()
        )));
    }
    let base = join(&state.q_prev, &state.q_curr);
    let eps = 1e-5 * (1.0 + base.amax());
    let r = tangent.ncols();

    // Directional derivatives of the flow map and of xi's coefficients.
    let mut flow_dir = Matrix::zeros(2 * n, r);
    let mut xi_dir = Matrix::zeros(r, r);
    for a in 0..r {
        let dir = tangent.column(a).into_owned();
        let (next_p, xi_p) = flow_and_xi(sys, &(&base + &dir * eps), cfg)?;
        let (next_m, xi_m) = flow_and_xi(sys, &(&base - &dir * eps), cfg)?;
        flow_dir.set_column(a, &((next_p - next_m) / (2.0 * eps)));
        xi_dir.set_column(a, &(tangent.transpose() * ((xi_p - xi_m) / (2.0 * eps))));
    }
    let d_xi = xi_dir.transpose() - &xi_dir;

    let (q2, _) = sys.step(state, cfg)?;
    let before = omega_ld(sys, &state.q_prev, &state.q_curr)?;
    let after = omega_ld(sys, &state.q_curr, &q2)?;
    let restricted_before = tangent.transpose() * before.matrix() * tangent;
    let pulled = flow_dir.transpose() * after.matrix() * &flow_dir;
    let scale = matrix_inf_norm(&restricted_before);
    if scale == 0.0 {
        return Err(Error::InvalidParameter("two-form vanishes on the given directions".into()));
    }
    let defect = &pulled - &restricted_before;
    Ok(SymplecticCheck {
        residual: matrix_inf_norm(&(&defect - &d_xi)) / scale,
        xi_term: matrix_inf_norm(&d_xi) / scale,
        defect: matrix_inf_norm(&defect) / scale,
    })
}

fn join(a: &Vector, b: &Vector) -> Vector {
    Vector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())
}

/// The flow map `(q0, q1) -> (q1, q2)` and the coefficients `(0, c)` of xi.
fn flow_and_xi(sys: &DiscreteSystem, x: &Vector, cfg: &StepperConfig) -> Result<(Vector, Vector)> {
    let n = sys.dim();
    let state = ConfigPair::new(x.rows(0, n).into_owned(), x.rows(n, n).into_owned());
    let (q2, c) = xi_covector(sys, &state, cfg)?;
    Ok((join(&state.q_curr, &q2), join(&Vector::zeros(n), &c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::DiscreteLagrangian;

    fn scalar(l: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> DiscreteSystem {
        let lag = DiscreteLagrangian::new(move |a: &Vector, b: &Vector| l(a[0], b[0]));
        DiscreteSystem::builder(1, 1.0, lag).unwrap().build().unwrap()
    }

    #[test]
    fn bilinear_lagrangian_has_unit_mixed_block() {
        let sys = scalar(|a, b| a * b);
        let w = omega_ld(&sys, &Vector::from_element(1, 0.3), &Vector::from_element(1, -1.2)).unwrap();
        assert!((w.mixed_block()[(0, 0)].abs() - 1.0).abs() < 1e-8);
        assert!(w.antisymmetry_error() < 1e-9);
        assert_eq!(w.diagonal_block_size(), 0.0);
    }

    #[test]
    fn separable_lagrangian_has_zero_form() {
        let sys = scalar(|a, b| a.sin() + b * b * b);
        let w = omega_ld(&sys, &Vector::from_element(1, 0.3), &Vector::from_element(1, 0.7)).unwrap();
        assert!(w.norm() < 1e-8);
    }

    #[test]
    fn free_particle_mixed_block_is_inverse_step() {
        let h = 0.5;
        let lag = DiscreteLagrangian::new(move |a: &Vector, b: &Vector| (b - a).norm_squared() / (2.0 * h));
        let sys = DiscreteSystem::builder(1, h, lag).unwrap().build().unwrap();
        let w = omega_ld(&sys, &Vector::from_element(1, 0.0), &Vector::from_element(1, 1.0)).unwrap();
        assert!((w.mixed_block()[(0, 0)].abs() - 2.0).abs() < 1e-8);
    }
}
