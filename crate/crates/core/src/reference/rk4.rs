use super::{ContinuousTrajectory, Samples};
use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, Vector};

/// Classical fourth order Runge-Kutta on `(q, qdot)`, storing every step.
pub fn rk4_flow<A>(accel: A, q0: &Vector, qdot0: &Vector, h_ref: f64, t_end: f64) -> Result<ContinuousTrajectory>
where
    A: Fn(&Vector, &Vector) -> Result<Vector>,
{
    rk4_flow_sampled(accel, q0, qdot0, h_ref, t_end, 1)
}

/// As [`rk4_flow`], storing every `keep_every`-th step.
pub fn rk4_flow_sampled<A>(
    accel: A,
    q0: &Vector,
    qdot0: &Vector,
    h_ref: f64,
    t_end: f64,
    keep_every: usize,
) -> Result<ContinuousTrajectory>
where
    A: Fn(&Vector, &Vector) -> Result<Vector>,
{
    if !(h_ref > 0.0 && h_ref.is_finite()) {
        return Err(Error::NonPositive(h_ref));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be nonnegative, got {t_end}")));
    }
    if keep_every == 0 {
        return Err(Error::InvalidParameter("keep_every must be at least 1".into()));
    }
    if q0.len() != qdot0.len() {
        return Err(Error::DimensionMismatch(format!(
            "position has length {}, velocity {}",
            q0.len(),
            qdot0.len()
        )));
    }
    let steps = (t_end / h_ref).round() as usize;
    let dim = q0.len();
    let stored = steps / keep_every + 1;
    let mut samples = Samples {
        dim,
        spacing: h_ref * keep_every as f64,
        positions: Vec::with_capacity(stored * dim),
        velocities: Vec::with_capacity(stored * dim),
    };
    let (mut q, mut v) = (q0.clone(), qdot0.clone());
    samples.positions.extend(q.iter());
    samples.velocities.extend(v.iter());
    let half = 0.5 * h_ref;
    for k in 1..=steps {
        let a1 = accel(&q, &v)?;
        let a2 = accel(&(&q + &v * half), &(&v + &a1 * half))?;
        let v2 = &v + &a1 * half;
        let a3 = accel(&(&q + &v2 * half), &(&v + &a2 * half))?;
        let v3 = &v + &a2 * half;
        let a4 = accel(&(&q + &v3 * h_ref), &(&v + &a3 * h_ref))?;
        let v4 = &v + &a3 * h_ref;
        q += (&v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h_ref / 6.0);
        v += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h_ref / 6.0);
        ensure_finite(&q, "reference position")?;
        if k % keep_every == 0 {
            samples.positions.extend(q.iter());
            samples.velocities.extend(v.iter());
        }
    }
    Ok(ContinuousTrajectory::sampled(samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn free_motion_is_linear() {
        let traj = rk4_flow(|q, _| Ok(Vector::zeros(q.len())), &v(&[1.0, -1.0]), &v(&[0.5, 2.0]), 0.1, 3.0).unwrap();
        let q = traj.position(2.0).unwrap();
        assert!((q - v(&[2.0, 3.0])).amax() < 1e-12);
        let mid = traj.position(2.05).unwrap();
        assert!((mid - v(&[2.025, 3.1])).amax() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator_follows_cosine() {
        let traj = rk4_flow(|q, _| Ok(-q), &v(&[1.0]), &v(&[0.0]), 1e-3, 1.0).unwrap();
        assert!((traj.position(1.0).unwrap()[0] - 1f64.cos()).abs() < 1e-6);
    }

    #[test]
    fn harmonic_energy_drift_is_tiny() {
        let traj = rk4_flow(|q, _| Ok(-q), &v(&[1.0]), &v(&[0.0]), 1e-3, 10.0).unwrap();
        let (q, p) = (traj.position(10.0).unwrap()[0], traj.velocity(10.0).unwrap().unwrap()[0]);
        let energy = 0.5 * (q * q + p * p);
        assert!((energy - 0.5).abs() / 0.5 < 1e-8);
    }

    #[test]
    fn decimated_storage_agrees() {
        let full = rk4_flow(|q, _| Ok(-q), &v(&[1.0]), &v(&[0.0]), 1e-2, 2.0).unwrap();
        let thin = rk4_flow_sampled(|q, _| Ok(-q), &v(&[1.0]), &v(&[0.0]), 1e-2, 2.0, 10).unwrap();
        for t in [0.0, 0.5, 1.0, 2.0] {
            assert_eq!(full.position(t).unwrap(), thin.position(t).unwrap());
        }
    }

    #[test]
    fn rejects_bad_step() {
        assert!(rk4_flow(|q, _| Ok(-q), &v(&[1.0]), &v(&[0.0]), 0.0, 1.0).is_err());
        assert!(rk4_flow(|q, _| Ok(-q), &v(&[1.0]), &v(&[0.0, 1.0]), 0.1, 1.0).is_err());
    }
}
