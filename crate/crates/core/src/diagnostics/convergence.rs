use rayon::prelude::*;

use crate::discrete::{ConfigPair, DiscreteSystem, StepperConfig};
use crate::error::{Error, Result};
use crate::numerics::loglog_slope;
use crate::reference::{max_error, ContinuousTrajectory};

/// Errors of a family of runs and the fitted order.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    /// `(h, error)` for every step size that completed, sorted by `h`.
    pub pairs: Vec<(f64, f64)>,
    /// Step sizes whose run failed, with the reason.
    pub failures: Vec<(f64, String)>,
    /// Log-log slope, when at least two runs completed with positive error.
    pub slope: Option<f64>,
}

/// Number of `flow` steps covering `[0, t_end]` from a seed pair at step `h`.
pub fn steps_for(h: f64, t_end: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be positive, got {t_end}")));
    }
    let points = (t_end / h).round();
    if points < 2.0 {
        return Err(Error::InvalidParameter(format!("t_end = {t_end} covers fewer than two steps of {h}")));
    }
    Ok(points as usize - 1)
}

/// Runs one trajectory per step size in parallel and measures its largest
/// deviation from `reference` in one coordinate.
pub fn convergence_study<B, S>(
    build: B,
    reference: &ContinuousTrajectory,
    seed: S,
    h_list: &[f64],
    t_end: f64,
    coordinate: usize,
    cfg: &StepperConfig,
) -> ConvergenceStudy
where
    B: Fn(f64) -> Result<DiscreteSystem> + Sync,
    S: Fn(f64) -> ConfigPair + Sync,
{
    let outcomes: Vec<(f64, Result<f64>)> = h_list
        .par_iter()
        .map(|&h| {
            let run = || -> Result<f64> {
                let steps = steps_for(h, t_end)?;
                let sys = build(h)?;
                let traj = sys.flow(&seed(h), steps, cfg)?;
                max_error(&traj, reference, coordinate)
            };
            (h, run())
        })
        .collect();

    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for (h, outcome) in outcomes {
        match outcome {
            Ok(e) => pairs.push((h, e)),
            Err(e) => failures.push((h, e.to_string())),
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let slope = loglog_slope(&pairs).ok();
    ConvergenceStudy { pairs, failures, slope }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Vector;
    use crate::reference::ContinuousTrajectory;
    use crate::systems::catalog::harmonic_oscillator;

    #[test]
    fn step_counts() {
        assert_eq!(steps_for(0.1, 500.0).unwrap(), 4999);
        assert_eq!(steps_for(0.025, 500.0).unwrap(), 19999);
        assert!(steps_for(0.0, 1.0).is_err());
        assert!(steps_for(1.0, 1.0).is_err());
    }

    #[test]
    fn harmonic_oscillator_is_convergent() {
        let exact = ContinuousTrajectory::analytic(|t| Vector::from_element(1, t.cos()), 10.0);
        // Seed on the exact solution so that only the integrator error remains.
        let seed = |h: f64| ConfigPair::new(Vector::from_element(1, 1.0), Vector::from_element(1, h.cos()));
        let study = convergence_study(
            harmonic_oscillator,
            &exact,
            seed,
            &[0.1, 0.05, 0.025, 0.0125],
            10.0,
            0,
            &StepperConfig::default(),
        );
        assert!(study.failures.is_empty());
        let slope = study.slope.unwrap();
        assert!((slope - 2.0).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn failures_are_collected() {
        let exact = ContinuousTrajectory::analytic(|t| Vector::from_element(1, t.cos()), 1.0);
        let seed = |h: f64| ConfigPair::new(Vector::from_element(1, 1.0), Vector::from_element(1, h.cos()));
        let study = convergence_study(harmonic_oscillator, &exact, seed, &[0.1, -0.1, 2.0], 1.0, 0, &StepperConfig::default());
        assert_eq!(study.pairs.len(), 1);
        assert_eq!(study.failures.len(), 2);
        assert!(study.slope.is_none());
    }
}
