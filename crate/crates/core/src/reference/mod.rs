//! Continuous ground truth for the worked systems.

mod rk4;

use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::sync::Arc;

use crate::discrete::Trajectory;
use crate::error::{Error, Result};
use crate::numerics::Vector;
use crate::systems::PendulumParams;

pub use rk4::{rk4_flow, rk4_flow_sampled};

/// Closed-form particle path for unit curvature, unit initial speed along
/// the diagonal, starting at the origin.
pub fn particle_exact(t: f64) -> Vector {
    let phase = SQRT_2 * t - FRAC_PI_4;
    Vector::from_vec(vec![phase.cos() - SQRT_2 / 2.0, phase.sin() + SQRT_2 / 2.0])
}

/// Below this norm of `dV/dqdot` the constraint does not determine the
/// accelerations.
pub const MIN_CONSTRAINT_GRADIENT: f64 = 1e-10;

/// Term `Phi(q)` in `dV/dq . qdot + dV/dp . M sin(theta) = s Phi(q)`, where
/// `s` is the saturation argument of the dissipation.
fn lyapunov_drift(params: &PendulumParams, q: &Vector) -> f64 {
    let (ii, jj, m) = (params.inertia_i, params.inertia_j, params.m_g);
    let (d, e, chi, n) = (params.d, params.e, params.chi, params.n as f64);
    let k = ii + jj * (n + 1.0);
    (-ii * jj * jj * m * d * d * (n + 1.0) * q[0].sin() + chi * d * k * (n * q[0] - q[1]).sin() + jj * m * e * q[0].sin())
        / (ii * jj * d * d * k)
}

/// Accelerations of the pendulum under the Lyapunov constraint.
///
/// The two equations are the unforced `theta` balance
/// `(I + J) thetaddot + J psiddot = M sin(theta)` and the constraint
/// `dV/dqdot . qddot = -F - dV/dq . qdot`. The linear system is singular
/// where the saturation argument vanishes, but the right-hand side vanishes
/// with it, so the solution is written in eliminated form.
pub fn pendulum_accel(params: &PendulumParams, q: &Vector, qdot: &Vector) -> Result<Vector> {
    let (wheel, _) = eliminated(params, q, qdot)?;
    let theta_acc = (params.m_g * q[0].sin() - wheel) / params.inertia_i;
    Ok(Vector::from_vec(vec![theta_acc, wheel / params.inertia_j - theta_acc]))
}

/// Constraint torque `lambda = -J (thetaddot + psiddot)` acting on the wheel.
pub fn pendulum_multiplier(params: &PendulumParams, q: &Vector, qdot: &Vector) -> Result<f64> {
    Ok(-eliminated(params, q, qdot)?.0)
}

/// `J (thetaddot + psiddot)` and the saturation argument.
fn eliminated(params: &PendulumParams, q: &Vector, qdot: &Vector) -> Result<(f64, f64)> {
    if q.len() != 2 || qdot.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "pendulum state needs two coordinates, got {} and {}",
            q.len(),
            qdot.len()
        )));
    }
    let lyap = params.lyapunov_pair();
    let norm = lyap.grad_velocity(qdot).norm();
    if norm < MIN_CONSTRAINT_GRADIENT {
        return Err(Error::ConstraintDegeneracy { norm });
    }
    let s = lyap.switching(qdot);
    Ok((-params.rho * s.tanh() - lyapunov_drift(params, q), s))
}

type Sampler = Arc<dyn Fn(f64) -> Vector + Send + Sync>;

/// A configuration curve `t -> q(t)` on `[0, t_end]`.
#[derive(Clone)]
pub struct ContinuousTrajectory {
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Analytic { sampler: Sampler, t_end: f64 },
    Sampled(Samples),
}

/// Equally spaced states starting at `t = 0`, stored flat.
#[derive(Clone, Debug)]
pub(crate) struct Samples {
    pub dim: usize,
    pub spacing: f64,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
}

impl Samples {
    fn count(&self) -> usize {
        self.positions.len() / self.dim
    }
}

impl ContinuousTrajectory {
    pub fn analytic<F>(sampler: F, t_end: f64) -> Self
    where
        F: Fn(f64) -> Vector + Send + Sync + 'static,
    {
        Self {
            kind: Kind::Analytic {
                sampler: Arc::new(sampler),
                t_end,
            },
        }
    }

    pub(crate) fn sampled(samples: Samples) -> Self {
        Self {
            kind: Kind::Sampled(samples),
        }
    }

    pub fn t_end(&self) -> f64 {
        match &self.kind {
            Kind::Analytic { t_end, .. } => *t_end,
            Kind::Sampled(s) => (s.count() - 1) as f64 * s.spacing,
        }
    }

    /// Position at `t`, linearly interpolated between stored samples.
    pub fn position(&self, t: f64) -> Result<Vector> {
        self.check_range(t)?;
        match &self.kind {
            Kind::Analytic { sampler, .. } => Ok(sampler(t)),
            Kind::Sampled(s) => Ok(interpolate(s, &s.positions, t)),
        }
    }

    /// Velocity at `t` for integrated trajectories; `None` for closed forms.
    pub fn velocity(&self, t: f64) -> Result<Option<Vector>> {
        self.check_range(t)?;
        match &self.kind {
            Kind::Analytic { .. } => Ok(None),
            Kind::Sampled(s) => Ok(Some(interpolate(s, &s.velocities, t))),
        }
    }

    fn check_range(&self, t: f64) -> Result<()> {
        let end = self.t_end();
        if !(t >= -1e-9 * end.max(1.0) && t <= end * (1.0 + 1e-12) + 1e-12) {
            return Err(Error::InvalidParameter(format!("time {t} outside reference interval [0, {end}]")));
        }
        Ok(())
    }
}

fn interpolate(s: &Samples, data: &[f64], t: f64) -> Vector {
    let last = s.count() - 1;
    let x = (t / s.spacing).max(0.0);
    let nearest = x.round();
    // Sample times are exact multiples of the spacing up to roundoff.
    if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        let i = (nearest as usize).min(last);
        return Vector::from_column_slice(&data[i * s.dim..(i + 1) * s.dim]);
    }
    let i = (x.floor() as usize).min(last.saturating_sub(1));
    let w = (x - i as f64).clamp(0.0, 1.0);
    let a = &data[i * s.dim..(i + 1) * s.dim];
    let b = &data[(i + 1) * s.dim..(i + 2) * s.dim];
    Vector::from_iterator(s.dim, a.iter().zip(b).map(|(a, b)| a + w * (b - a)))
}

/// Largest deviation of one coordinate from the reference over all points.
pub fn max_error(traj: &Trajectory, reference: &ContinuousTrajectory, coordinate: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (k, point) in traj.points.iter().enumerate() {
        if coordinate >= point.len() {
            return Err(Error::DimensionMismatch(format!(
                "coordinate {coordinate} out of range for dimension {}",
                point.len()
            )));
        }
        let exact = reference.position(traj.time(k))?;
        worst = worst.max((point[coordinate] - exact[coordinate]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{linear_solve, Matrix};
    use crate::systems::signed_curvature;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn particle_starts_at_origin_with_unit_diagonal_velocity() {
        assert!(particle_exact(0.0).amax() < 1e-15);
        let eps = 1e-6;
        let vel = (particle_exact(eps) - particle_exact(-eps)) / (2.0 * eps);
        assert!((vel - v(&[1.0, 1.0])).amax() < 1e-8);
    }

    proptest! {
        #[test]
        fn particle_stays_on_unit_circle(t in -100.0f64..100.0) {
            let p = particle_exact(t);
            let r = ((p[0] + SQRT_2 / 2.0).powi(2) + (p[1] - SQRT_2 / 2.0).powi(2)).sqrt();
            prop_assert!((r - 1.0).abs() < 1e-12);
        }

        #[test]
        fn particle_has_unit_curvature(t in -20.0f64..20.0) {
            let e = 1e-3;
            let (a, b, c) = (particle_exact(t - e), particle_exact(t), particle_exact(t + e));
            let vel = (&c - &a) / (2.0 * e);
            let acc = (&c - &b * 2.0 + &a) / (e * e);
            let k = signed_curvature((vel[0], vel[1]), (acc[0], acc[1])).unwrap();
            prop_assert!((k - 1.0).abs() < 1e-4);
        }

        #[test]
        fn accel_satisfies_both_equations(
            th in -1.0f64..1.0, ps in -50.0f64..50.0, thd in -2.0f64..2.0, psd in -200.0f64..200.0,
        ) {
            let p = PendulumParams::default();
            let lyap = p.lyapunov_pair();
            let (q, qd) = (v(&[th, ps]), v(&[thd, psd]));
            prop_assume!(lyap.grad_velocity(&qd).norm() > 1e-6);
            let acc = pendulum_accel(&p, &q, &qd).unwrap();
            let row1 = (p.inertia_i + p.inertia_j) * acc[0] + p.inertia_j * acc[1];
            prop_assert!((row1 - p.m_g * th.sin()).abs() <= 1e-10 * (1.0 + p.m_g));
            let gv = lyap.grad_velocity(&qd);
            let lhs = gv.dot(&acc);
            let rhs = -lyap.dissipation(&qd) - lyap.grad_position(&q).dot(&qd);
            let size = gv.abs().dot(&acc.abs()) + rhs.abs();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * size);
        }
    }

    #[test]
    fn accel_matches_direct_two_by_two_solve() {
        let p = PendulumParams::default();
        let lyap = p.lyapunov_pair();
        let (q, qd) = (v(&[0.5, 0.0]), v(&[0.0, 0.5]));
        let gv = lyap.grad_velocity(&qd);
        let a = Matrix::from_row_slice(2, 2, &[p.inertia_i + p.inertia_j, p.inertia_j, gv[0], gv[1]]);
        let b = v(&[p.m_g * 0.5f64.sin(), -lyap.dissipation(&qd) - lyap.grad_position(&q).dot(&qd)]);
        let direct = linear_solve(&a, &b).unwrap();
        let closed = pendulum_accel(&p, &q, &qd).unwrap();
        assert!((direct - &closed).amax() < 1e-9 * closed.amax());
        assert!(closed.iter().all(|x| x.is_finite()));
        let lambda = pendulum_multiplier(&p, &q, &qd).unwrap();
        assert!((lambda + p.inertia_j * (closed[0] + closed[1])).abs() < 1e-9);
    }

    #[test]
    fn accel_at_rest_is_degenerate() {
        let p = PendulumParams::default();
        let err = pendulum_accel(&p, &v(&[0.5, 0.0]), &v(&[0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::ConstraintDegeneracy { .. }));
    }

    #[test]
    fn rest_state_has_no_constraint_forcing() {
        // F = 0 and dV/dq . qdot = 0 at zero velocity.
        let lyap = PendulumParams::default().lyapunov_pair();
        let (q, qd) = (v(&[0.2, 1.0]), v(&[0.0, 0.0]));
        assert_eq!(-lyap.dissipation(&qd) - lyap.grad_position(&q).dot(&qd), 0.0);
    }

    #[test]
    fn max_error_of_offset_copy() {
        let h = 0.1;
        let traj = Trajectory {
            h,
            points: (0..20).map(|k| particle_exact(k as f64 * h) + v(&[0.25, 0.0])).collect(),
            records: Vec::new(),
        };
        let exact = ContinuousTrajectory::analytic(particle_exact, 10.0);
        assert!((max_error(&traj, &exact, 0).unwrap() - 0.25).abs() < 1e-14);
        assert!(max_error(&traj, &exact, 1).unwrap() < 1e-14);
        assert!(max_error(&traj, &exact, 2).is_err());
    }

    #[test]
    fn analytic_range_checked() {
        let exact = ContinuousTrajectory::analytic(particle_exact, 1.0);
        assert!(exact.position(2.0).is_err());
        assert!(exact.velocity(0.5).unwrap().is_none());
    }
}
