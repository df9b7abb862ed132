use dsocs::diagnostics::{
    check_flow_conditions, check_symplectic_evolution, check_symplectic_evolution_restricted, energy_series,
    lyapunov_series, omega_ld, rank_history, xi_form, DiagnosticsReport,
};
use dsocs::discrete::{ConfigPair, StepperConfig};
use dsocs::numerics::{Matrix, Vector};
use dsocs::systems::catalog::{free_particle, harmonic_oscillator, holonomic_test, nonholonomic_test};
use dsocs::systems::{make_particle, make_pendulum, particle_seed, pendulum_seed, ParticleParams, PendulumParams};
use proptest::prelude::*;

fn v2(x: f64, y: f64) -> Vector {
    Vector::from_vec(vec![x, y])
}

#[test]
fn xi_vanishes_for_unconstrained_and_admissible_directions() {
    let cfg = StepperConfig::default();
    let free = free_particle(0.1).unwrap();
    let state = ConfigPair::new(v2(0.2, -0.3), v2(0.25, -0.2));
    assert_eq!(xi_form(&free, &state, &cfg, &v2(1.0, 2.0), &v2(-3.0, 0.5)).unwrap(), 0.0);

    let sys = make_particle(&ParticleParams::default()).unwrap();
    let seed = particle_seed(0.1);
    let (q2, _) = sys.step(&seed, &cfg).unwrap();
    let along = (&q2 - &seed.q_prev) / 0.2;
    let across = v2(-along[1], along[0]);
    let zero = Vector::zeros(2);
    let on = xi_form(&sys, &seed, &cfg, &zero, &along).unwrap();
    let off = xi_form(&sys, &seed, &cfg, &zero, &across).unwrap();
    assert!(on.abs() < 1e-10, "xi along admissible variation = {on:e}");
    // Regression baseline from our own run.
    assert!((off + 0.280_744_945_5).abs() < 1e-8, "xi across = {off}");
}

#[test]
fn holonomic_leaf_restriction_is_symplectic() {
    let cfg = StepperConfig::default();
    let sys = holonomic_test(0.1).unwrap();
    let seed = ConfigPair::new(v2(0.3, 0.7), v2(0.35, 0.7));
    let traj = sys.flow(&seed, 100, &cfg).unwrap();
    assert!(traj.points.iter().all(|p| p[1] == 0.7));
    let mut leaf = Matrix::zeros(4, 2);
    leaf[(0, 0)] = 1.0;
    leaf[(2, 1)] = 1.0;
    for k in (0..99).step_by(11) {
        let state = ConfigPair::new(traj.points[k].clone(), traj.points[k + 1].clone());
        let check = check_symplectic_evolution_restricted(&sys, &state, &cfg, &leaf).unwrap();
        assert!(check.defect <= 1e-6 && check.xi_term <= 1e-8, "{check:?}");
    }
}

#[test]
fn symplectic_identity_on_constrained_systems() {
    let cfg = StepperConfig::default();
    let particle = make_particle(&ParticleParams::default()).unwrap();
    let c = check_symplectic_evolution(&particle, &particle_seed(0.1), &cfg).unwrap();
    assert!(c.residual <= 1e-5, "{c:?}");
    // The constraint forces do work, so the flow alone is not symplectic.
    assert!(c.defect > 1e-3, "{c:?}");

    let p = PendulumParams::default();
    let pendulum = make_pendulum(&p).unwrap();
    let c = check_symplectic_evolution(&pendulum, &pendulum_seed(p.h), &cfg).unwrap();
    assert!(c.residual <= 1e-5, "{c:?}");

    let harmonic = harmonic_oscillator(0.1).unwrap();
    let state = ConfigPair::new(Vector::from_element(1, 1.0), Vector::from_element(1, 0.99));
    let c = check_symplectic_evolution(&harmonic, &state, &cfg).unwrap();
    assert!(c.residual <= 1e-6 && c.xi_term <= 1e-8, "{c:?}");
}

#[test]
fn rank_records_along_oracle_trajectories() {
    let cfg = StepperConfig::default();
    let sys = make_particle(&ParticleParams::default()).unwrap();
    let traj = sys.flow(&particle_seed(0.1), 200, &cfg).unwrap();
    let records = rank_history(&sys, &traj).unwrap();
    assert_eq!(records.len(), 200);
    for r in &records {
        assert!(r.is_full(), "{r:?}");
        assert_eq!(r.forward_rank, r.forward_domain);
    }

    let nh = nonholonomic_test(0.1).unwrap();
    let seed = ConfigPair::new(v2(0.5, 0.0), v2(0.52, -0.01));
    let traj = nh.flow(&seed, 50, &cfg).unwrap();
    assert!(rank_history(&nh, &traj).unwrap().iter().all(|r| r.is_full()));
}

#[test]
fn off_constraint_triple_is_rejected() {
    let sys = make_particle(&ParticleParams::default()).unwrap();
    assert!(check_flow_conditions(&sys, &v2(0.0, 0.0), &v2(0.1, 0.1), &v2(0.2, 0.2)).is_err());
}

#[test]
fn pendulum_report_shows_root_pairs() {
    let cfg = StepperConfig::default();
    let p = PendulumParams::default();
    let sys = make_pendulum(&p).unwrap();
    let traj = sys.flow(&pendulum_seed(p.h), 300, &cfg).unwrap();
    let report = DiagnosticsReport::collect(&sys, &traj, &cfg, 5, Some(&p)).unwrap();
    assert!(report.multi_root_steps().count() > 100);
    assert!(report.hard_failures().is_empty(), "{:?}", report.hard_failures());
    let series = energy_series(&sys, &traj);
    assert!(series.iter().any(|e| (e - series[0]).abs() > 1.0), "pendulum energy is not conserved");
    assert!(lyapunov_series(&p, &traj).iter().all(|v| *v >= 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn omega_is_antisymmetric_with_empty_diagonal_blocks(
        coords in proptest::collection::vec(-2.0f64..2.0, 4),
        h in 0.05f64..0.5,
    ) {
        let (q, q_next) = (v2(coords[0], coords[1]), v2(coords[2], coords[3]));
        for sys in [make_particle(&ParticleParams::default().with_step(h)).unwrap(), make_pendulum(&PendulumParams::default().with_step(h)).unwrap(), holonomic_test(h).unwrap()] {
            let omega = omega_ld(&sys, &q, &q_next).unwrap();
            prop_assert!(omega.antisymmetry_error() <= 1e-9 * omega.norm());
            prop_assert!(omega.diagonal_block_size() <= 1e-9 * omega.norm());
        }
    }

    #[test]
    fn xi_is_linear(
        a in proptest::collection::vec(-1.0f64..1.0, 4),
        b in proptest::collection::vec(-1.0f64..1.0, 4),
        s in -3.0f64..3.0,
    ) {
        let cfg = StepperConfig::default();
        let sys = make_particle(&ParticleParams::default()).unwrap();
        let seed = particle_seed(0.1);
        let xi = |d: &[f64]| xi_form(&sys, &seed, &cfg, &v2(d[0], d[1]), &v2(d[2], d[3])).unwrap();
        let combined: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let lhs = xi(&combined);
        let rhs = xi(&a) + s * xi(&b);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }
}
