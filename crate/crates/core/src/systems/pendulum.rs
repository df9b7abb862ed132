//! Inertia wheel pendulum stabilized by a Lyapunov constraint.
//!
//! Coordinates are the pendulum angle `theta` (zero at the upright
//! position) and the wheel angle `psi`, both unwrapped on the universal
//! cover `R^2`. The constraint `dV/dt = -F` forces the Lyapunov function
//! `V` to decrease; the only admissible variations are along `theta`, so
//! the constraint force acts on the wheel.

use std::sync::Arc;

use super::select::select_root;
use crate::discrete::{ConfigPair, DiscreteLagrangian, DiscreteSystem, Selection, StepRecord, StepperConfig};
use crate::error::{Error, Result};
use crate::numerics::{enumerate_scalar_roots, inf_norm, newton_solve, Matrix, Vector};

/// Physical and controller constants. `m_g` is the gravitational torque
/// coefficient `M = M~ g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PendulumParams {
    pub inertia_i: f64,
    pub inertia_j: f64,
    pub m_g: f64,
    pub d: f64,
    pub e: f64,
    pub chi: f64,
    pub rho: f64,
    pub n: i64,
    pub h: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            inertia_i: 312.5,
            inertia_j: 2.0772,
            m_g: 37.98,
            d: 1.0,
            e: 1000.0,
            chi: 100.0,
            rho: 2.0,
            n: -154,
            h: 0.1,
        }
    }
}

impl PendulumParams {
    pub fn with_step(self, h: f64) -> Self {
        Self { h, ..self }
    }

    pub fn a(&self) -> f64 {
        1.0 / self.inertia_i
    }

    pub fn b(&self) -> f64 {
        -1.0 / self.inertia_i
    }

    pub fn c(&self) -> f64 {
        1.0 / self.inertia_i + 1.0 / self.inertia_j
    }

    fn det(&self) -> f64 {
        self.a() * self.c() - self.b() * self.b()
    }

    pub fn h_c(&self) -> f64 {
        self.d * (self.n as f64 * self.b() - self.c()) / self.det()
    }

    pub fn g_c(&self) -> f64 {
        self.d * (self.n as f64 * self.a() - self.b()) / self.det()
    }

    pub fn f(&self) -> f64 {
        (self.g_c().powi(2) + self.e) / self.h_c()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("I", self.inertia_i),
            ("J", self.inertia_j),
            ("M", self.m_g),
            ("d", self.d),
            ("e", self.e),
            ("chi", self.chi),
            ("rho", self.rho),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.h.is_finite() && self.h != 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be nonzero, got {}", self.h)));
        }
        if !(self.n as f64 * self.b() > self.c()) {
            return Err(Error::InvalidParameter(format!(
                "n = {} violates n b > c (b = {}, c = {})",
                self.n,
                self.b(),
                self.c()
            )));
        }
        if self.det() == 0.0 {
            return Err(Error::InvalidParameter("a c - b^2 vanishes".into()));
        }
        if !(self.h_c() > 0.0) {
            return Err(Error::InvalidParameter(format!("h_c = {} must be positive", self.h_c())));
        }
        Ok(())
    }

    pub fn lyapunov_pair(&self) -> LyapunovPair {
        LyapunovPair {
            inertia_i: self.inertia_i,
            inertia_j: self.inertia_j,
            m_g: self.m_g,
            d: self.d,
            e: self.e,
            chi: self.chi,
            rho: self.rho,
            n: self.n as f64,
            h_c: self.h_c(),
            g_c: self.g_c(),
            f: self.f(),
        }
    }

    /// `L = I thetadot^2 / 2 + J (thetadot + psidot)^2 / 2 - M (1 + cos theta)`.
    pub fn lagrangian(&self, q: &Vector, qdot: &Vector) -> f64 {
        let w = qdot[0] + qdot[1];
        0.5 * self.inertia_i * qdot[0] * qdot[0] + 0.5 * self.inertia_j * w * w - self.m_g * (1.0 + q[0].cos())
    }

    /// Multiplier applied to `dV/dt + F` in the discrete kinematic residual
    /// so that its scale matches the solver tolerance.
    pub fn kinematic_scale(&self) -> f64 {
        self.h * self.h / (self.f() * (self.inertia_i + self.inertia_j))
    }

    /// `psi2` solving the discrete theta balance for a given `theta2`.
    pub fn wheel_from_theta(&self, q0: &Vector, q1: &Vector, theta2: f64) -> f64 {
        let (ii, jj, h) = (self.inertia_i, self.inertia_j, self.h);
        2.0 * q1[1] - q0[1] + (h * h * self.m_g * q1[0].sin() - (ii + jj) * (theta2 - 2.0 * q1[0] + q0[0])) / jj
    }

    /// Coefficients of the reduced step equation
    /// `A t^2 + B t + C = -rho tanh(D t + E) (D t + E)` in `t = theta2`,
    /// normalized as `dV/dt + F` (before [`kinematic_scale`](Self::kinematic_scale)).
    pub fn reduced_equation(&self, q0: &Vector, q1: &Vector) -> ReducedEquation {
        let lyap = self.lyapunov_pair();
        let h = self.h;
        let at = |t: f64| {
            let q2 = Vector::from_vec(vec![t, self.wheel_from_theta(q0, q1, t)]);
            let vel = (&q2 - q0) / (2.0 * h);
            let acc = (&q2 - q1 * 2.0 + q0) / (h * h);
            (lyap.rate(q1, &vel, &acc) - lyap.dissipation(&vel), lyap.switching(&vel))
        };
        // Quadratic and affine parts are recovered exactly from three samples.
        let (ym, sm) = at(-1.0);
        let (y0, s0) = at(0.0);
        let (yp, sp) = at(1.0);
        ReducedEquation {
            a: 0.5 * (yp + ym) - y0,
            b: 0.5 * (yp - ym),
            c: y0,
            d: 0.5 * (sp - sm),
            e: s0,
            rho: self.rho,
        }
    }
}

/// `A t^2 + B t + C + rho tanh(D t + E) (D t + E)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedEquation {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub rho: f64,
}

impl ReducedEquation {
    pub fn eval(&self, t: f64) -> f64 {
        let s = self.d * t + self.e;
        self.a * t * t + self.b * t + self.c + self.rho * s.tanh() * s
    }

    /// Where the saturation argument `D t + E` vanishes.
    pub fn degenerate_root(&self) -> f64 {
        -self.e / self.d
    }

    /// Splits the quadratic as `(D t + E)(alpha t + gamma) + remainder`.
    ///
    /// For the pendulum the remainder vanishes up to roundoff, so the
    /// equation reads `(D t + E) g(t) = 0` with
    /// `g(t) = alpha t + gamma + rho tanh(D t + E)`.
    pub fn factor(&self) -> Factored {
        let alpha = self.a / self.d;
        let gamma = (self.b - alpha * self.e) / self.d;
        Factored {
            alpha,
            gamma,
            remainder: self.c - gamma * self.e,
            d: self.d,
            e: self.e,
            rho: self.rho,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factored {
    pub alpha: f64,
    pub gamma: f64,
    pub remainder: f64,
    d: f64,
    e: f64,
    rho: f64,
}

impl Factored {
    /// The cofactor `g` of the saturation argument.
    pub fn cofactor(&self, t: f64) -> f64 {
        self.alpha * t + self.gamma + self.rho * (self.d * t + self.e).tanh()
    }

    /// Whether the remainder is roundoff relative to the terms it came from.
    pub fn is_exact(&self, eq: &ReducedEquation) -> bool {
        let size = eq.a.abs() + eq.b.abs() + eq.c.abs();
        self.remainder.abs() <= 1e-9 * size.max(f64::MIN_POSITIVE)
    }
}

/// The Lyapunov function `V` and dissipation `F` of the stabilizing
/// constraint, with their gradients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovPair {
    pub inertia_i: f64,
    pub inertia_j: f64,
    pub m_g: f64,
    pub d: f64,
    pub e: f64,
    pub chi: f64,
    pub rho: f64,
    pub n: f64,
    pub h_c: f64,
    pub g_c: f64,
    pub f: f64,
}

impl LyapunovPair {
    /// `(I + J) thetadot + J psidot` and `thetadot + psidot`.
    fn momenta(&self, qdot: &Vector) -> (f64, f64) {
        let (ii, jj) = (self.inertia_i, self.inertia_j);
        ((ii + jj) * qdot[0] + jj * qdot[1], qdot[0] + qdot[1])
    }

    /// Argument of the saturation in `F`.
    pub fn switching(&self, qdot: &Vector) -> f64 {
        let (p, w) = self.momenta(qdot);
        self.g_c * p + self.h_c * self.inertia_j * w
    }

    pub fn value(&self, q: &Vector, qdot: &Vector) -> f64 {
        let (p, w) = self.momenta(qdot);
        let jj = self.inertia_j;
        0.5 * self.f * p * p
            + 0.5 * self.h_c * jj * jj * w * w
            + self.g_c * jj * p * w
            + self.chi * (1.0 - (q[1] - self.n * q[0]).cos())
            + self.m_g * self.e / self.d * (1.0 - q[0].cos())
    }

    pub fn dissipation(&self, qdot: &Vector) -> f64 {
        let s = self.switching(qdot);
        self.rho * s.tanh() * s
    }

    pub fn grad_position(&self, q: &Vector) -> Vector {
        let twist = self.chi * (q[1] - self.n * q[0]).sin();
        Vector::from_vec(vec![-self.n * twist + self.m_g * self.e / self.d * q[0].sin(), twist])
    }

    pub fn grad_velocity(&self, qdot: &Vector) -> Vector {
        let (p, w) = self.momenta(qdot);
        let jj = self.inertia_j;
        let v_p = self.f * p + self.g_c * jj * w;
        let v_w = self.h_c * jj * jj * w + self.g_c * jj * p;
        Vector::from_vec(vec![(self.inertia_i + jj) * v_p + v_w, jj * v_p + v_w])
    }

    /// `dV/dt + F` for a second order state.
    pub fn rate(&self, q: &Vector, qdot: &Vector, qddot: &Vector) -> f64 {
        self.grad_position(q).dot(qdot) + self.grad_velocity(qdot).dot(qddot) + self.dissipation(qdot)
    }
}

/// Discrete pendulum with the scalar-reduction stepper.
pub fn make_pendulum(params: &PendulumParams) -> Result<DiscreteSystem> {
    params.validate()?;
    let (ii, jj, mg, h) = (params.inertia_i, params.inertia_j, params.m_g, params.h);
    let p = *params;
    let lagrangian = DiscreteLagrangian::new(move |q0: &Vector, q1: &Vector| h * p.lagrangian(q0, &((q1 - q0) / h)))
        .with_derivatives(
            move |q0: &Vector, q1: &Vector| {
                let (dt, dp) = (q1[0] - q0[0], q1[1] - q0[1]);
                let wheel = jj * (dt + dp) / h;
                Vector::from_vec(vec![-(ii * dt / h) - wheel + h * mg * q0[0].sin(), -wheel])
            },
            move |q0: &Vector, q1: &Vector| {
                let (dt, dp) = (q1[0] - q0[0], q1[1] - q0[1]);
                let wheel = jj * (dt + dp) / h;
                Vector::from_vec(vec![ii * dt / h + wheel, wheel])
            },
        );
    let lyap = params.lyapunov_pair();
    let scale = params.kinematic_scale();
    let stepper = Arc::new(move |sys: &DiscreteSystem, state: &ConfigPair, cfg: &StepperConfig| reduced_step(&p, sys, state, cfg));
    DiscreteSystem::builder(2, h, lagrangian)?
        .name("pendulum")
        .kinematic(1, move |q0, q1, q2| kinematic(&lyap, scale, h, q0, q1, q2))
        .variational(1, move |_, _, _| Ok(theta_direction(&p)))
        .custom_step(stepper)
        .coordinate_names(["theta", "psi"])
        .build()
}

/// The same discrete pendulum stepped by two-dimensional Newton iteration.
pub fn make_pendulum_generic(params: &PendulumParams) -> Result<DiscreteSystem> {
    Ok(make_pendulum(params)?.without_custom_step())
}

/// Roots closer than this are one root.
const MERGE_TOLERANCE: f64 = 1e-10;

/// Spans the `theta` direction. The length `h / (I + J)` puts the force
/// balance in units of angle so its roundoff stays below the solver
/// tolerance when the wheel has wound up many turns.
fn theta_direction(params: &PendulumParams) -> Matrix {
    Matrix::from_column_slice(2, 1, &[params.h / (params.inertia_i + params.inertia_j), 0.0])
}

fn kinematic(lyap: &LyapunovPair, scale: f64, h: f64, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Vector> {
    let vel = (q2 - q0) / (2.0 * h);
    let acc = (q2 - q1 * 2.0 + q0) / (h * h);
    Ok(Vector::from_element(1, scale * lyap.rate(q1, &vel, &acc)))
}

fn reduced_step(
    params: &PendulumParams,
    sys: &DiscreteSystem,
    state: &ConfigPair,
    cfg: &StepperConfig,
) -> Result<(Vector, StepRecord)> {
    let (q0, q1) = (&state.q_prev, &state.q_curr);
    let h = params.h;
    let lyap = params.lyapunov_pair();
    let scale = params.kinematic_scale();
    let full = |t: f64| Vector::from_vec(vec![t, params.wheel_from_theta(q0, q1, t)]);
    let reduced = |t: f64| {
        let q2 = full(t);
        let vel = (&q2 - q0) / (2.0 * h);
        let acc = (&q2 - q1 * 2.0 + q0) / (h * h);
        scale * lyap.rate(q1, &vel, &acc)
    };
    let lyapunov_after = |t: f64| lyap.value(q1, &((full(t) - q0) / (2.0 * h)));

    let (theta, candidate_count, note) = if cfg.selection == Selection::NewtonOnly {
        let guess = Vector::from_element(1, 2.0 * q1[0] - q0[0]);
        let out = newton_solve(|t: &Vector| Ok(Vector::from_element(1, reduced(t[0]))), &guess, &cfg.solve)?;
        (out.x[0], 1, "newton".to_string())
    } else {
        cfg.validate()?;
        let (lo, hi) = (q1[0] + cfg.scan_lo, q1[0] + cfg.scan_hi);
        let eq = params.reduced_equation(q0, q1);
        let factored = eq.factor();
        let (regular, degenerate) = if factored.is_exact(&eq) {
            let regular = enumerate_scalar_roots(|t| factored.cofactor(t), lo, hi, cfg.scan_points);
            let t_s = eq.degenerate_root();
            let degenerate = (lo..=hi).contains(&t_s).then_some(t_s);
            (regular, degenerate)
        } else {
            (enumerate_scalar_roots(reduced, lo, hi, cfg.scan_points), None)
        };
        let mut all = regular.clone();
        if let Some(t_s) = degenerate {
            if all.iter().all(|r| (r - t_s).abs() > MERGE_TOLERANCE) {
                all.push(t_s);
            }
        }
        let offered = if cfg.keep_degenerate_roots || regular.is_empty() { &all } else { &regular };
        if offered.is_empty() {
            return Err(Error::NoRootFound { lo, hi });
        }
        let (chosen, note) = select_root(offered, q1[0], Some(&lyapunov_after), cfg.selection)?;
        (chosen, all.len(), note)
    };

    let mut q2 = full(theta);
    let mut residual_norm = inf_norm(&sys.step_residual(q0, q1, &q2)?);
    let mut iterations = 0;
    if residual_norm > cfg.solve.tolerance {
        let polished = newton_solve(|t: &Vector| Ok(Vector::from_element(1, reduced(t[0]))), &Vector::from_element(1, theta), &cfg.solve)?;
        iterations = polished.iterations;
        q2 = full(polished.x[0]);
        residual_norm = inf_norm(&sys.step_residual(q0, q1, &q2)?);
        if residual_norm > cfg.solve.tolerance {
            return Err(Error::NoConvergence {
                iterations,
                residual: residual_norm,
            });
        }
    }
    Ok((
        q2,
        StepRecord {
            newton_iterations: iterations,
            residual_norm,
            candidate_count,
            selected_root_note: note,
        },
    ))
}

/// Seed from `theta(0) = 0.5`, `psi(0) = 0`, `thetadot(0) = 0`, `psidot(0) = 0.5`.
pub fn pendulum_seed(h: f64) -> ConfigPair {
    ConfigPair::new(Vector::from_vec(vec![0.5, 0.0]), Vector::from_vec(vec![0.5, 0.5 * h]))
}

/// Continuous initial position and velocity matching [`pendulum_seed`].
pub fn pendulum_initial_state() -> (Vector, Vector) {
    (Vector::from_vec(vec![0.5, 0.0]), Vector::from_vec(vec![0.0, 0.5]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_coefficients() {
        let p = PendulumParams::default();
        p.validate().unwrap();
        // Reordered arithmetic: h_c = -d (I + (n+1) J), g_c = d (n+1) J.
        let (ii, jj, n) = (p.inertia_i, p.inertia_j, p.n as f64);
        let h_c = -p.d * (ii + (n + 1.0) * jj);
        let g_c = p.d * (n + 1.0) * jj;
        assert!((p.h_c() - h_c).abs() < 1e-9 * h_c.abs());
        assert!((p.g_c() - g_c).abs() < 1e-9 * g_c.abs());
        let f = (g_c * g_c + p.e) / h_c;
        assert!((p.f() - f).abs() < 1e-9 * f.abs());
    }

    #[test]
    fn rejects_bad_winding_number() {
        let p = PendulumParams { n: 10, ..PendulumParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn lyapunov_vanishes_upright_at_rest() {
        let lyap = PendulumParams::default().lyapunov_pair();
        assert_eq!(lyap.value(&Vector::zeros(2), &Vector::zeros(2)), 0.0);
        // Winding in psi by 2 pi is also an equilibrium on the cover.
        let wound = Vector::from_vec(vec![0.0, 2.0 * std::f64::consts::PI]);
        assert!(lyap.value(&wound, &Vector::zeros(2)).abs() < 1e-10);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let lyap = PendulumParams::default().lyapunov_pair();
        let q = Vector::from_vec(vec![0.3, -0.7]);
        let qd = Vector::from_vec(vec![0.02, 0.4]);
        let eps = 1e-6;
        for i in 0..2 {
            let mut e = Vector::zeros(2);
            e[i] = eps;
            let dq = (lyap.value(&(&q + &e), &qd) - lyap.value(&(&q - &e), &qd)) / (2.0 * eps);
            let dv = (lyap.value(&q, &(&qd + &e)) - lyap.value(&q, &(&qd - &e))) / (2.0 * eps);
            assert!((dq - lyap.grad_position(&q)[i]).abs() < 1e-5 * (1.0 + dq.abs()));
            assert!((dv - lyap.grad_velocity(&qd)[i]).abs() < 1e-5 * (1.0 + dv.abs()));
        }
    }

    #[test]
    fn reduced_leading_coefficient_matches_closed_form() {
        for h in [0.2, 0.1, 0.05] {
            let p = PendulumParams::default().with_step(h);
            let seed = pendulum_seed(h);
            let eq = p.reduced_equation(&seed.q_prev, &seed.q_curr);
            let (ii, jj, n) = (p.inertia_i, p.inertia_j, p.n as f64);
            let expected = -p.d * ii * ii * (ii + (n + 1.0) * jj) / (2.0 * h.powi(3));
            assert!((eq.a - expected).abs() < 1e-6 * expected.abs(), "h = {h}: {} vs {expected}", eq.a);
        }
    }
}
