//! Numerical checks of the structural properties of discrete flows.

mod convergence;
mod flow;
mod forms;
mod report;

pub use convergence::{convergence_study, steps_for, ConvergenceStudy};
pub use flow::{check_flow_conditions, RankRecord, ON_CONSTRAINT, RANK_THRESHOLD};
pub use forms::{
    check_symplectic_evolution, check_symplectic_evolution_restricted, matrix_inf_norm, omega_ld, xi_covector, xi_form,
    FormMatrix, SymplecticCheck,
};
pub use report::{DiagnosticsReport, SeriesSummary, ANTISYMMETRY_TOLERANCE};

use crate::discrete::{DiscreteSystem, Trajectory};
use crate::error::Result;
use crate::systems::PendulumParams;

/// `L_d(q_k, q_{k+1})` for every consecutive pair.
pub fn energy_series(sys: &DiscreteSystem, traj: &Trajectory) -> Vec<f64> {
    traj.points.windows(2).map(|w| sys.discrete_lagrangian(&w[0], &w[1])).collect()
}

/// `V(q_k, (q_{k+1} - q_{k-1}) / 2h)` at the interior points `k = 1 .. N-1`.
pub fn lyapunov_series(params: &PendulumParams, traj: &Trajectory) -> Vec<f64> {
    let lyap = params.lyapunov_pair();
    let h = traj.h;
    traj.triples().map(|(a, b, c)| lyap.value(b, &((c - a) / (2.0 * h)))).collect()
}

/// Rank records at every interior point of a trajectory.
pub fn rank_history(sys: &DiscreteSystem, traj: &Trajectory) -> Result<Vec<RankRecord>> {
    traj.triples()
        .enumerate()
        .map(|(i, (a, b, c))| {
            check_flow_conditions(sys, a, b, c).map(|mut r| {
                r.index = i + 1;
                r
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::{ConfigPair, StepperConfig};
    use crate::numerics::Vector;
    use crate::systems::catalog::free_particle;

    #[test]
    fn free_energy_is_constant() {
        let sys = free_particle(0.1).unwrap();
        let traj = sys
            .flow(
                &ConfigPair::new(Vector::from_vec(vec![0.0, 0.0]), Vector::from_vec(vec![0.1, -0.2])),
                50,
                &StepperConfig::default(),
            )
            .unwrap();
        let e = energy_series(&sys, &traj);
        assert_eq!(e.len(), 51);
        assert!(e.iter().all(|x| (x - e[0]).abs() < 1e-12));
    }

    #[test]
    fn lyapunov_vanishes_at_upright_rest() {
        let rest = Trajectory {
            h: 0.1,
            points: vec![Vector::zeros(2); 5],
            records: Vec::new(),
        };
        let v = lyapunov_series(&PendulumParams::default(), &rest);
        assert_eq!(v, vec![0.0; 3]);
    }
}
