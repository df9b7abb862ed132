use crate::error::{Error, Result};

const BRACKET_WIDTH: f64 = 1e-13;
const MERGE_DISTANCE: f64 = 1e-10;

/// Finds every sign change of `f` on a uniform grid over `[lo, hi]` and
/// bisects each bracket down to a width of `1e-13`.
///
/// Roots closer than `1e-10` are merged. Tangential roots (no sign change)
/// are not detected. Non-finite samples are skipped.
pub fn enumerate_scalar_roots<F>(f: F, lo: f64, hi: f64, grid_points: usize) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || grid_points < 2 {
        return Vec::new();
    }
    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<(f64, f64)> = (0..grid_points)
        .map(|i| {
            let x = if i + 1 == grid_points { hi } else { lo + step * i as f64 };
            (x, f(x))
        })
        .collect();

    let mut roots = Vec::new();
    for (i, &(x, fx)) in grid.iter().enumerate() {
        if fx == 0.0 {
            roots.push(x);
            continue;
        }
        if let Some(&(xn, fxn)) = grid.get(i + 1) {
            if fx.is_finite() && fxn.is_finite() && fxn != 0.0 && (fx < 0.0) != (fxn < 0.0) {
                roots.push(bisect(&f, x, fx, xn));
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|later, earlier| (*later - *earlier).abs() < MERGE_DISTANCE);
    roots
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut fa: f64, mut b: f64) -> f64 {
    while b - a > BRACKET_WIDTH {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Least-squares slope of `ln(error)` against `ln(h)`.
pub fn loglog_slope(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 (h, error) pairs, got {}",
            pairs.len()
        )));
    }
    for &(h, e) in pairs {
        if !(h > 0.0) {
            return Err(Error::NonPositive(h));
        }
        if !(e > 0.0) {
            return Err(Error::NonPositive(e));
        }
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all step sizes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_circle_roots() {
        let roots = enumerate_scalar_roots(|x| x * x - 1.0, -2.0, 2.0, 101);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + 1.0).abs() < 1e-12);
        assert!((roots[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_real_roots() {
        assert!(enumerate_scalar_roots(|x| x * x + 1.0, -2.0, 2.0, 101).is_empty());
    }

    #[test]
    fn degenerate_intervals_are_empty() {
        assert!(enumerate_scalar_roots(|x| x, 1.0, 1.0, 10).is_empty());
        assert!(enumerate_scalar_roots(|x| x, -1.0, 1.0, 1).is_empty());
    }

    #[test]
    fn grid_hit_is_not_duplicated() {
        // x = 0 lands exactly on the grid.
        let roots = enumerate_scalar_roots(|x| x, -1.0, 1.0, 3);
        assert_eq!(roots, vec![0.0]);
    }

    #[test]
    fn slopes() {
        assert!((loglog_slope(&[(0.1, 0.1), (0.01, 0.01)]).unwrap() - 1.0).abs() < 1e-12);
        assert!((loglog_slope(&[(0.1, 0.01), (0.01, 0.0001)]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_errors() {
        assert!(matches!(loglog_slope(&[(0.1, 0.1)]), Err(Error::InsufficientData(_))));
        assert!(matches!(loglog_slope(&[(0.1, 0.1), (0.0, 1.0)]), Err(Error::NonPositive(_))));
        assert!(matches!(loglog_slope(&[(0.1, -0.1), (0.2, 1.0)]), Err(Error::NonPositive(_))));
    }

    proptest! {
        #[test]
        fn finds_separated_quartic_roots(
            raw in proptest::collection::vec(-4.5f64..4.5, 1..=4),
        ) {
            let (lo, hi, points) = (-5.0, 5.0, 2001usize);
            let sep = 2.0 * (hi - lo) / points as f64;
            let mut rs = raw.clone();
            rs.sort_by(f64::total_cmp);
            prop_assume!(rs.windows(2).all(|w| w[1] - w[0] > sep));
            let poly = |x: f64| rs.iter().map(|r| x - r).product::<f64>();
            let found = enumerate_scalar_roots(poly, lo, hi, points);
            prop_assert_eq!(found.len(), rs.len());
            for (f, r) in found.iter().zip(&rs) {
                prop_assert!((f - r).abs() < 1e-9);
            }
        }

        #[test]
        fn slope_invariant_under_error_scaling(
            errs in proptest::collection::vec(1e-6f64..1.0, 4),
            scale in 1e-3f64..1e3,
        ) {
            let hs = [0.2, 0.1, 0.05, 0.025];
            let base: Vec<(f64, f64)> = hs.iter().copied().zip(errs.iter().copied()).collect();
            let scaled: Vec<(f64, f64)> = base.iter().map(|&(h, e)| (h, e * scale)).collect();
            let a = loglog_slope(&base).unwrap();
            let b = loglog_slope(&scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
