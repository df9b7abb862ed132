use std::fmt;

use super::{check_symplectic_evolution, energy_series, lyapunov_series, omega_ld, rank_history, ConvergenceStudy, RankRecord};
use crate::discrete::{ConfigPair, DiscreteSystem, StepperConfig, Trajectory};
use crate::error::Result;
use crate::systems::PendulumParams;

/// Relative antisymmetry tolerance for a two-form.
pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-9;

/// Extremes of a scalar series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesSummary {
    pub len: usize,
    pub first: f64,
    pub last: f64,
    pub min: f64,
    pub max: f64,
    /// Largest `|x_k - x_0|`.
    pub max_drift: f64,
    /// Largest `x_{k+1} - x_k`, zero for a non-increasing series.
    pub max_increase: f64,
}

impl SeriesSummary {
    pub fn of(series: &[f64]) -> Option<Self> {
        let (&first, &last) = (series.first()?, series.last()?);
        let fold = |init: f64, f: fn(f64, f64) -> f64| series.iter().copied().fold(init, f);
        Some(Self {
            len: series.len(),
            first,
            last,
            min: fold(f64::INFINITY, f64::min),
            max: fold(f64::NEG_INFINITY, f64::max),
            max_drift: series.iter().map(|x| (x - first).abs()).fold(0.0, f64::max),
            max_increase: series.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
        })
    }
}

impl fmt::Display for SeriesSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} first={:.6e} last={:.6e} min={:.6e} max={:.6e} max_drift={:.3e} max_increase={:.3e}",
            self.len, self.first, self.last, self.min, self.max, self.max_drift, self.max_increase
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub system: String,
    pub h: f64,
    pub steps: usize,
    /// Largest normalized residual of the two-form evolution identity over the sampled states.
    pub symplectic_residual: f64,
    /// Largest normalized size of the correction term over the same states.
    pub xi_residual: f64,
    pub sampled_states: usize,
    /// Sampled states at which the identity could not be evaluated.
    pub symplectic_failures: Vec<(usize, String)>,
    /// Largest relative antisymmetry error of the two-form.
    pub antisymmetry: f64,
    pub rank_records: Vec<RankRecord>,
    pub energy: Option<SeriesSummary>,
    pub lyapunov: Option<SeriesSummary>,
    pub candidate_counts: Vec<usize>,
    pub convergence: Option<ConvergenceStudy>,
}

impl DiagnosticsReport {
    /// Evaluates every check on a computed trajectory, sampling the
    /// two-form identity at `samples` evenly spaced states.
    pub fn collect(
        sys: &DiscreteSystem,
        traj: &Trajectory,
        cfg: &StepperConfig,
        samples: usize,
        pendulum: Option<&PendulumParams>,
    ) -> Result<Self> {
        let mut report = Self {
            system: sys.name().to_string(),
            h: sys.h(),
            steps: traj.records.len(),
            rank_records: rank_history(sys, traj)?,
            energy: SeriesSummary::of(&energy_series(sys, traj)),
            lyapunov: pendulum.and_then(|p| SeriesSummary::of(&lyapunov_series(p, traj))),
            candidate_counts: traj.records.iter().map(|r| r.candidate_count).collect(),
            ..Self::default()
        };

        // States whose successor is also known, so the flow is defined there.
        let usable = traj.len().saturating_sub(2);
        let count = samples.min(usable);
        for i in 0..count {
            let k = if count > 1 { i * (usable - 1) / (count - 1) } else { 0 };
            let state = ConfigPair::new(traj.points[k].clone(), traj.points[k + 1].clone());
            let omega = omega_ld(sys, &state.q_prev, &state.q_curr)?;
            report.antisymmetry = report.antisymmetry.max(omega.antisymmetry_error() / omega.norm().max(f64::MIN_POSITIVE));
            match check_symplectic_evolution(sys, &state, cfg) {
                Ok(check) => {
                    report.sampled_states += 1;
                    report.symplectic_residual = report.symplectic_residual.max(check.residual);
                    report.xi_residual = report.xi_residual.max(check.xi_term);
                }
                Err(e) => report.symplectic_failures.push((k, e.to_string())),
            }
        }
        Ok(report)
    }

    pub fn with_convergence(mut self, study: ConvergenceStudy) -> Self {
        self.convergence = Some(study);
        self
    }

    /// Violations of the invariants that must hold for every system.
    pub fn hard_failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.antisymmetry > ANTISYMMETRY_TOLERANCE {
            out.push(format!("two-form antisymmetry error {:.3e}", self.antisymmetry));
        }
        if let Some(r) = self.rank_records.iter().find(|r| !r.is_full()) {
            let deficient = self.rank_records.iter().filter(|r| !r.is_full()).count();
            out.push(format!("{deficient} rank-deficient points, first at index {}", r.index));
        }
        out
    }

    /// Indices of the steps whose equation had more than one admissible root.
    pub fn multi_root_steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.candidate_counts.iter().enumerate().filter(|(_, &c)| c > 1).map(|(k, _)| k)
    }
}

impl fmt::Display for DiagnosticsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system: {}", self.system)?;
        writeln!(f, "h: {}", self.h)?;
        writeln!(f, "steps: {}", self.steps)?;
        writeln!(f, "sampled states: {}", self.sampled_states)?;
        writeln!(f, "symplectic residual: {:.3e}", self.symplectic_residual)?;
        writeln!(f, "xi residual: {:.3e}", self.xi_residual)?;
        for (k, e) in &self.symplectic_failures {
            writeln!(f, "symplectic check skipped at {k}: {e}")?;
        }
        writeln!(f, "antisymmetry: {:.3e}", self.antisymmetry)?;

        let full = self.rank_records.iter().filter(|r| r.is_full()).count();
        writeln!(f, "rank records: {full}/{} full", self.rank_records.len())?;
        let min_forward = self.rank_records.iter().map(|r| r.forward_min_singular).fold(f64::INFINITY, f64::min);
        let min_backward = self.rank_records.iter().map(|r| r.backward_min_singular).fold(f64::INFINITY, f64::min);
        if !self.rank_records.is_empty() {
            writeln!(f, "smallest forward singular value: {min_forward:.3e}")?;
            writeln!(f, "smallest backward singular value: {min_backward:.3e}")?;
        }
        for r in self.rank_records.iter().filter(|r| !r.is_full()).take(20) {
            writeln!(
                f,
                "  deficient at {}: forward {}/{} backward {}/{}",
                r.index, r.forward_rank, r.forward_domain, r.backward_rank, r.backward_domain
            )?;
        }

        if let Some(s) = &self.energy {
            writeln!(f, "energy: {s}")?;
        }
        if let Some(s) = &self.lyapunov {
            writeln!(f, "lyapunov: {s}")?;
        }

        let multi: Vec<usize> = self.multi_root_steps().collect();
        let max_count = self.candidate_counts.iter().copied().max().unwrap_or(0);
        writeln!(f, "candidate counts: max {max_count}, {} steps with more than one root", multi.len())?;
        if !multi.is_empty() {
            let shown: Vec<String> = multi.iter().take(10).map(|k| k.to_string()).collect();
            writeln!(f, "  first multi-root steps: {}", shown.join(" "))?;
        }
        write!(f, "candidate history:")?;
        for chunk in self.candidate_counts.chunks(100) {
            write!(f, "\n  ")?;
            for c in chunk {
                write!(f, "{c}")?;
            }
        }
        writeln!(f)?;

        if let Some(study) = &self.convergence {
            writeln!(f, "convergence:")?;
            for (h, e) in &study.pairs {
                writeln!(f, "  h={h} error={e:.6e}")?;
            }
            for (h, e) in &study.failures {
                writeln!(f, "  h={h} failed: {e}")?;
            }
            match study.slope {
                Some(s) => writeln!(f, "  slope: {s:.4}")?,
                None => writeln!(f, "  slope: unavailable")?,
            }
        }

        let failures = self.hard_failures();
        if failures.is_empty() {
            writeln!(f, "status: ok")
        } else {
            writeln!(f, "status: FAILED ({})", failures.join("; "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Vector;
    use crate::systems::catalog::free_particle;

    #[test]
    fn series_summary() {
        let s = SeriesSummary::of(&[3.0, 1.0, 2.0, 0.5]).unwrap();
        assert_eq!((s.min, s.max, s.last), (0.5, 3.0, 0.5));
        assert_eq!(s.max_drift, 2.5);
        assert_eq!(s.max_increase, 1.0);
        assert!(SeriesSummary::of(&[]).is_none());
    }

    #[test]
    fn free_particle_report_is_clean() {
        let sys = free_particle(0.1).unwrap();
        let cfg = StepperConfig::default();
        let seed = ConfigPair::new(Vector::from_vec(vec![0.0, 0.0]), Vector::from_vec(vec![0.1, 0.1]));
        let traj = sys.flow(&seed, 30, &cfg).unwrap();
        let report = DiagnosticsReport::collect(&sys, &traj, &cfg, 5, None).unwrap();
        assert_eq!(report.sampled_states, 5);
        assert!(report.symplectic_residual <= 1e-6);
        assert!(report.xi_residual <= 1e-8);
        assert!(report.hard_failures().is_empty());
        assert_eq!(report.rank_records.len(), 30);
        let text = report.to_string();
        assert!(text.contains("status: ok"));
        assert!(text.contains("rank records: 30/30 full"));
    }
}
