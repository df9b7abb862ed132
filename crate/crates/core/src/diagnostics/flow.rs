use crate::discrete::DiscreteSystem;
use crate::error::{Error, Result};
use crate::numerics::{fd_jacobian, inf_norm, null_space, singular_values, Matrix, Vector};

/// Relative singular value cutoff for numerical rank.
pub const RANK_THRESHOLD: f64 = 1e-9;

/// Step residual above which a triple is not treated as a trajectory triple.
pub const ON_CONSTRAINT: f64 = 1e-8;

/// Ranks of the force balance derivatives at one trajectory triple.
#[derive(Clone, Debug, PartialEq)]
pub struct RankRecord {
    /// Index of the middle point in its trajectory.
    pub index: usize,
    /// Dimension of the tangent space of the kinematic constraint set in `Q^3`.
    pub tangent_dim: usize,
    /// Rank of `D beta` on that tangent space.
    pub beta_rank: usize,
    /// Dimension of the directions moving only `q2` within the constraint set.
    pub forward_domain: usize,
    pub forward_rank: usize,
    pub forward_min_singular: f64,
    /// Same for directions moving only `q0`.
    pub backward_domain: usize,
    pub backward_rank: usize,
    pub backward_min_singular: f64,
}

impl RankRecord {
    /// Both one-sided derivatives are injective on the constraint set.
    pub fn is_full(&self) -> bool {
        self.forward_rank == self.forward_domain && self.backward_rank == self.backward_domain
    }
}

/// Evaluates the existence conditions of the discrete flow at a
/// trajectory triple.
///
/// Rank deficiency is reported in the record, not as an error.
pub fn check_flow_conditions(sys: &DiscreteSystem, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<RankRecord> {
    let residual = inf_norm(&sys.step_residual(q0, q1, q2)?);
    if residual > ON_CONSTRAINT {
        return Err(Error::OffConstraint { residual });
    }
    let n = sys.dim();
    let nk = sys.kinematic_dim();
    let x = Vector::from_iterator(3 * n, q0.iter().chain(q1.iter()).chain(q2.iter()).copied());
    let eps = 1e-6 * (1.0 + x.amax());
    let split = |x: &Vector| (x.rows(0, n).into_owned(), x.rows(n, n).into_owned(), x.rows(2 * n, n).into_owned());
    let jac = fd_jacobian(
        |x: &Vector| {
            let (a, b, c) = split(x);
            sys.step_residual(&a, &b, &c)
        },
        &x,
        eps,
    )?;
    let sigma_max = singular_values(&jac).first().copied().unwrap_or(0.0);
    let cutoff = RANK_THRESHOLD * sigma_max;

    let kin = jac.rows(0, nk).into_owned();
    let beta = jac.rows(nk, jac.nrows() - nk).into_owned();
    let tangent = null_space(&kin, RANK_THRESHOLD * singular_values(&kin).first().copied().unwrap_or(0.0));
    let (beta_rank, _) = restricted_rank(&beta, &tangent, cutoff);

    let block = |m: &Matrix, j: usize| m.columns(j * n, n).into_owned();
    let one_sided = |j: usize| {
        let k = block(&kin, j);
        let domain = null_space(&k, RANK_THRESHOLD * singular_values(&k).first().copied().unwrap_or(0.0));
        let (rank, min_sv) = restricted_rank(&block(&beta, j), &domain, cutoff);
        (domain.ncols(), rank, min_sv)
    };
    let (forward_domain, forward_rank, forward_min_singular) = one_sided(2);
    let (backward_domain, backward_rank, backward_min_singular) = one_sided(0);
    Ok(RankRecord {
        index: 0,
        tangent_dim: tangent.ncols(),
        beta_rank,
        forward_domain,
        forward_rank,
        forward_min_singular,
        backward_domain,
        backward_rank,
        backward_min_singular,
    })
}

/// Rank and smallest singular value of `map` restricted to the column
/// span of `domain`.
fn restricted_rank(map: &Matrix, domain: &Matrix, cutoff: f64) -> (usize, f64) {
    if domain.ncols() == 0 {
        return (0, f64::INFINITY);
    }
    let restricted = map * domain;
    let sv = singular_values(&restricted);
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    let min_sv = if sv.len() < domain.ncols() { 0.0 } else { sv.last().copied().unwrap_or(0.0) };
    (rank, min_sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::DiscreteLagrangian;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn free_particle_is_full_rank() {
        let h = 0.5;
        let lag = DiscreteLagrangian::new(move |a: &Vector, b: &Vector| (b - a).norm_squared() / (2.0 * h));
        let sys = DiscreteSystem::builder(2, h, lag).unwrap().build().unwrap();
        let rec = check_flow_conditions(&sys, &v(&[0.0, 0.0]), &v(&[1.0, 1.0]), &v(&[2.0, 2.0])).unwrap();
        assert!(rec.is_full());
        assert_eq!(rec.tangent_dim, 6);
        assert_eq!(rec.forward_domain, 2);
        assert!((rec.forward_min_singular - 1.0 / h).abs() < 1e-6);
    }

    #[test]
    fn zero_basis_reports_deficiency() {
        let h = 0.5;
        let lag = DiscreteLagrangian::new(move |a: &Vector, b: &Vector| (b - a).norm_squared() / (2.0 * h));
        let sys = DiscreteSystem::builder(1, h, lag)
            .unwrap()
            .variational(1, |_, _, _| Ok(Matrix::zeros(1, 1)))
            .build()
            .unwrap();
        let rec = check_flow_conditions(&sys, &v(&[0.0]), &v(&[1.0]), &v(&[5.0])).unwrap();
        assert!(!rec.is_full());
        assert_eq!(rec.forward_rank, 0);
    }

    #[test]
    fn off_constraint_rejected() {
        let h = 0.5;
        let lag = DiscreteLagrangian::new(move |a: &Vector, b: &Vector| (b - a).norm_squared() / (2.0 * h));
        let sys = DiscreteSystem::builder(1, h, lag).unwrap().build().unwrap();
        assert!(check_flow_conditions(&sys, &v(&[0.0]), &v(&[1.0]), &v(&[3.0])).is_err());
    }
}
