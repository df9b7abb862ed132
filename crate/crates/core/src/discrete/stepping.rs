use std::fmt;
use std::str::FromStr;

use super::DiscreteSystem;
use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, inf_norm, newton_solve, SolveConfig, Vector};

/// A point `(q_{k-1}, q_k)` of `Q x Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigPair {
    pub q_prev: Vector,
    pub q_curr: Vector,
}

impl ConfigPair {
    pub fn new(q_prev: Vector, q_curr: Vector) -> Self {
        Self { q_prev, q_curr }
    }
}

/// How a custom stepper chooses among several roots of its step equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Closest to the previous position; near-ties fall back to the
    /// Lyapunov criterion when one is available.
    NearestPrevious,
    /// Smallest Lyapunov value after the step.
    LyapunovDecrease,
    /// Skip enumeration and run Newton from the extrapolated guess.
    NewtonOnly,
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Selection::NearestPrevious => "nearest-previous",
            Selection::LyapunovDecrease => "lyapunov-decrease",
            Selection::NewtonOnly => "newton-only",
        })
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "nearest-previous" | "nearest" => Ok(Selection::NearestPrevious),
            "lyapunov-decrease" | "lyapunov" => Ok(Selection::LyapunovDecrease),
            "newton-only" | "newton" => Ok(Selection::NewtonOnly),
            other => Err(Error::InvalidParameter(format!("unknown selection policy `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub solve: SolveConfig,
    /// Scan bracket for scalar-reduction steppers, as offsets from the
    /// current value of the reduced coordinate.
    pub scan_lo: f64,
    pub scan_hi: f64,
    pub scan_points: usize,
    pub selection: Selection,
    /// Offer roots at which the constraint degenerates (holds for every
    /// acceleration) to the selection policy instead of discarding them.
    pub keep_degenerate_roots: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            solve: SolveConfig::default(),
            scan_lo: -2.0,
            scan_hi: 2.0,
            scan_points: 4001,
            selection: Selection::NearestPrevious,
            keep_degenerate_roots: false,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        self.solve.validate()?;
        if !(self.scan_lo < self.scan_hi) {
            return Err(Error::InvalidParameter(format!(
                "scan bracket [{}, {}] is empty",
                self.scan_lo, self.scan_hi
            )));
        }
        if self.scan_points < 2 {
            return Err(Error::InvalidParameter("scan_points must be at least 2".into()));
        }
        Ok(())
    }
}

/// Solver metadata for one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepRecord {
    pub newton_iterations: usize,
    pub residual_norm: f64,
    pub candidate_count: usize,
    pub selected_root_note: String,
}

/// Points `q_0 ... q_N` of a discrete trajectory and per-step metadata.
///
/// `records[k]` describes the solve that produced `points[k + 2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub h: f64,
    pub points: Vec<Vector>,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn from_pair(h: f64, state: &ConfigPair) -> Self {
        Self {
            h,
            points: vec![state.q_prev.clone(), state.q_curr.clone()],
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    pub fn last_pair(&self) -> Option<ConfigPair> {
        let n = self.points.len();
        (n >= 2).then(|| ConfigPair::new(self.points[n - 2].clone(), self.points[n - 1].clone()))
    }

    /// Consecutive triples `(q_{k-1}, q_k, q_{k+1})`.
    pub fn triples(&self) -> impl Iterator<Item = (&Vector, &Vector, &Vector)> {
        self.points.windows(3).map(|w| (&w[0], &w[1], &w[2]))
    }

    pub fn coordinate(&self, index: usize) -> Vec<f64> {
        self.points.iter().map(|p| p[index]).collect()
    }
}

impl DiscreteSystem {
    /// Solves for `q_{k+1}` given `(q_{k-1}, q_k)`.
    pub fn step(&self, state: &ConfigPair, cfg: &StepperConfig) -> Result<(Vector, StepRecord)> {
        self.check_len(&state.q_prev, "q_prev")?;
        self.check_len(&state.q_curr, "q_curr")?;
        let (q_next, record) = match &self.custom_step {
            Some(stepper) => stepper(self, state, cfg)?,
            None => self.newton_step(state, cfg)?,
        };
        self.check_len(&q_next, "step result")?;
        ensure_finite(&q_next, "step result")?;
        Ok((q_next, record))
    }

    /// Generic stepper: Newton on the step residual from the constant
    /// velocity guess `2 q_k - q_{k-1}`.
    pub fn newton_step(&self, state: &ConfigPair, cfg: &StepperConfig) -> Result<(Vector, StepRecord)> {
        self.check_well_posed()?;
        let (q0, q1) = (&state.q_prev, &state.q_curr);
        let guess = q1 * 2.0 - q0;
        let pre = self.precondition_rows;
        if pre > 0 {
            let kin = self.kinematic_residual(q0, q1, &guess)?;
            let off = kin.rows(0, pre).amax();
            if off > cfg.solve.tolerance {
                return Err(Error::OffConstraint { residual: off });
            }
        }
        let active = |q2: &Vector| -> Result<Vector> {
            let full = self.step_residual(q0, q1, q2)?;
            Ok(full.rows(pre, full.len() - pre).into_owned())
        };
        let out = newton_solve(active, &guess, &cfg.solve)?;
        let residual_norm = inf_norm(&self.step_residual(q0, q1, &out.x)?);
        Ok((
            out.x,
            StepRecord {
                newton_iterations: out.iterations,
                residual_norm,
                candidate_count: 1,
                selected_root_note: "newton".into(),
            },
        ))
    }

    /// Iterates [`step`](Self::step) `steps` times.
    ///
    /// On failure the error carries the failing step index and the partial
    /// trajectory computed so far.
    pub fn flow(&self, state: &ConfigPair, steps: usize, cfg: &StepperConfig) -> Result<Trajectory> {
        if steps == 0 {
            return Err(Error::InvalidParameter("flow needs at least one step".into()));
        }
        let mut traj = Trajectory::from_pair(self.h, state);
        traj.points.reserve(steps);
        let mut pair = state.clone();
        for k in 1..=steps {
            match self.step(&pair, cfg) {
                Ok((q_next, record)) => {
                    pair.q_prev = std::mem::replace(&mut pair.q_curr, q_next.clone());
                    traj.points.push(q_next);
                    traj.records.push(record);
                }
                Err(source) => {
                    return Err(Error::Flow {
                        index: k,
                        source: Box::new(source),
                        partial: Box::new(traj),
                    })
                }
            }
        }
        Ok(traj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::DiscreteLagrangian;

    fn free(dim: usize, h: f64) -> DiscreteSystem {
        let lag = DiscreteLagrangian::new(move |a: &Vector, b: &Vector| (b - a).norm_squared() / (2.0 * h));
        DiscreteSystem::builder(dim, h, lag).unwrap().build().unwrap()
    }

    #[test]
    fn free_step_is_linear_extrapolation() {
        let sys = free(2, 0.1);
        let state = ConfigPair::new(Vector::from_vec(vec![0.0, 0.0]), Vector::from_vec(vec![1.0, 1.0]));
        let (q2, rec) = sys.step(&state, &StepperConfig::default()).unwrap();
        assert!((q2 - Vector::from_vec(vec![2.0, 2.0])).amax() < 1e-12);
        assert!(rec.residual_norm <= 1e-12);
    }

    #[test]
    fn free_flow_counts_up() {
        let sys = free(1, 1.0);
        let state = ConfigPair::new(Vector::from_vec(vec![0.0]), Vector::from_vec(vec![1.0]));
        let traj = sys.flow(&state, 10, &StepperConfig::default()).unwrap();
        assert_eq!(traj.len(), 12);
        for (k, p) in traj.points.iter().enumerate() {
            assert!((p[0] - k as f64).abs() < 1e-9, "point {k} = {}", p[0]);
        }
        assert_eq!(traj.records.len(), 10);
    }

    #[test]
    fn flow_reports_failing_index_with_partial_trajectory() {
        // Beta = q2^2 + 1 has no real root, so the first step fails.
        let lag = DiscreteLagrangian::new(|_, _| 0.0)
            .with_derivatives(|_, b: &Vector| b.map(|x| -(x * x) - 1.0), |_, _| Vector::zeros(1));
        let sys = DiscreteSystem::builder(1, 1.0, lag).unwrap().build().unwrap();
        let cfg = StepperConfig {
            solve: SolveConfig {
                max_iterations: 5,
                ..SolveConfig::default()
            },
            ..StepperConfig::default()
        };
        let state = ConfigPair::new(Vector::from_vec(vec![0.0]), Vector::from_vec(vec![1.0]));
        match sys.flow(&state, 3, &cfg) {
            Err(Error::Flow { index, partial, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(partial.len(), 2);
            }
            other => panic!("expected flow error, got {other:?}"),
        }
    }

    #[test]
    fn zero_steps_rejected() {
        let sys = free(1, 1.0);
        let state = ConfigPair::new(Vector::zeros(1), Vector::zeros(1));
        assert!(sys.flow(&state, 0, &StepperConfig::default()).is_err());
    }

    #[test]
    fn selection_parses() {
        assert_eq!("nearest-previous".parse::<Selection>().unwrap(), Selection::NearestPrevious);
        assert_eq!("lyapunov".parse::<Selection>().unwrap(), Selection::LyapunovDecrease);
        assert!("closest".parse::<Selection>().is_err());
    }
}
