use super::{fd_jacobian, inf_norm, linear_solve, SolveConfig, Vector};
use crate::error::{Error, Result};

const MAX_HALVINGS: usize = 20;

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub x: Vector,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Damped Newton iteration with a central-difference Jacobian.
///
/// Each update is halved up to 20 times until the residual norm decreases.
/// If no halving helps, the smallest trial step is taken anyway and the
/// iteration continues; the iteration cap then reports non-convergence.
/// Once the tolerance is met, one more undamped correction is kept if it
/// does not increase the residual.
pub fn newton_solve<F>(residual: F, guess: &Vector, cfg: &SolveConfig) -> Result<NewtonOutcome>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    cfg.validate()?;
    let mut x = guess.clone();
    let mut r = residual(&x)?;
    if r.len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "residual has {} components for {} unknowns",
            r.len(),
            x.len()
        )));
    }
    let mut norm = inf_norm(&r);
    for iteration in 0..cfg.max_iterations {
        if norm <= cfg.tolerance {
            let (x, norm) = polish(&residual, x, &r, norm, cfg)?;
            return Ok(NewtonOutcome {
                x,
                iterations: iteration,
                residual_norm: norm,
            });
        }
        let jac = fd_jacobian(&residual, &x, cfg.fd_epsilon)?;
        let dx = linear_solve(&jac, &(-&r))?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &x + &dx * t;
            // A failed evaluation (e.g. leaving the domain) counts as no decrease.
            if let Ok(rt) = residual(&trial) {
                let nt = inf_norm(&rt);
                if nt.is_finite() && nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, rn, nn)) => {
                x = xn;
                r = rn;
                norm = nn;
            }
            None => {
                let trial = &x + &dx * t;
                let rt = residual(&trial)?;
                x = trial;
                norm = inf_norm(&rt);
                r = rt;
            }
        }
    }
    if norm <= cfg.tolerance {
        return Ok(NewtonOutcome {
            x,
            iterations: cfg.max_iterations,
            residual_norm: norm,
        });
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
        residual: norm,
    })
}

fn polish<F>(residual: &F, x: Vector, r: &Vector, norm: f64, cfg: &SolveConfig) -> Result<(Vector, f64)>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    if norm == 0.0 {
        return Ok((x, norm));
    }
    let Ok(dx) = linear_solve(&fd_jacobian(residual, &x, cfg.fd_epsilon)?, &(-r)) else {
        return Ok((x, norm));
    };
    let trial = &x + dx;
    match residual(&trial) {
        Ok(rt) if inf_norm(&rt) <= norm => Ok((trial, inf_norm(&rt))),
        _ => Ok((x, norm)),
    }
}
