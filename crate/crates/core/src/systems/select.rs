use crate::discrete::Selection;
use crate::error::{Error, Result};

/// Candidates closer than this to each other count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-6;

/// Chooses one root of a scalar step equation.
///
/// Returns the chosen value and a short note for the step record. The
/// result does not depend on the order of `candidates`.
pub fn select_root(
    candidates: &[f64],
    previous: f64,
    lyapunov_after: Option<&dyn Fn(f64) -> f64>,
    selection: Selection,
) -> Result<(f64, String)> {
    let mut sorted: Vec<f64> = candidates.iter().copied().filter(|c| c.is_finite()).collect();
    if sorted.is_empty() {
        return Err(Error::InvalidParameter("no finite candidates to select from".into()));
    }
    sorted.sort_by(f64::total_cmp);
    if sorted.len() == 1 {
        return Ok((sorted[0], "single root".into()));
    }

    match selection {
        Selection::LyapunovDecrease => {
            let v = lyapunov_after
                .ok_or_else(|| Error::InvalidParameter("lyapunov-decrease selection needs a Lyapunov function".into()))?;
            Ok((lowest_lyapunov(&sorted, v), format!("lowest V of {}", sorted.len())))
        }
        Selection::NearestPrevious | Selection::NewtonOnly => {
            let mut by_distance = sorted.clone();
            // Stable sort keeps ascending value order among equal distances.
            by_distance.sort_by(|a, b| (a - previous).abs().total_cmp(&(b - previous).abs()));
            let (best, second) = (by_distance[0], by_distance[1]);
            if (best - second).abs() >= TIE_TOLERANCE {
                return Ok((best, format!("nearest of {}", sorted.len())));
            }
            match lyapunov_after {
                Some(v) => {
                    let tied = [best.min(second), best.max(second)];
                    Ok((lowest_lyapunov(&tied, v), format!("near tie of {} broken by V", sorted.len())))
                }
                None => Err(Error::AmbiguousRoot { first: best, second }),
            }
        }
    }
}

fn lowest_lyapunov(sorted: &[f64], v: &dyn Fn(f64) -> f64) -> f64 {
    let mut best = sorted[0];
    let mut best_v = v(best);
    for &c in &sorted[1..] {
        let vc = v(c);
        if vc < best_v {
            best = c;
            best_v = vc;
        }
    }
    best
}
