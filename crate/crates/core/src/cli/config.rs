use std::path::PathBuf;

use crate::diagnostics::steps_for;
use crate::discrete::{seed_from_continuous, ConfigPair, DiscreteSystem, Selection, StepperConfig};
use crate::error::{Error, Result};
use crate::io::{parse_h_list, parse_vector, Config};
use crate::numerics::Vector;
use crate::systems::{make_particle, make_pendulum, make_pendulum_generic, test_system_by_name, ParticleParams, PendulumParams};

/// Keys accepted in configuration files and `--param`.
pub const KNOWN_KEYS: &[&str] = &[
    "system",
    "h",
    "steps",
    "t_end",
    "h_list",
    "coordinate",
    "seed.q",
    "seed.qdot",
    "seed.q0",
    "seed.q1",
    "out",
    "selection",
    "keep_degenerate_roots",
    "generic_stepper",
    "scan.lo",
    "scan.hi",
    "scan.points",
    "solver.tolerance",
    "solver.max_iterations",
    "solver.fd_epsilon",
    "diagnose.samples",
    "particle.k",
    "particle.mass",
    "pendulum.inertia_i",
    "pendulum.inertia_j",
    "pendulum.m_g",
    "pendulum.d",
    "pendulum.e",
    "pendulum.chi",
    "pendulum.rho",
    "pendulum.n",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Particle,
    Pendulum,
    Free,
    Harmonic,
    NonholonomicTest,
    HolonomicTest,
}

impl SystemKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "particle" => Self::Particle,
            "pendulum" => Self::Pendulum,
            "free" => Self::Free,
            "harmonic" => Self::Harmonic,
            "nonholonomic-test" => Self::NonholonomicTest,
            "holonomic-test" => Self::HolonomicTest,
            other => return Err(config_error(format!("unknown system `{other}`"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Particle => "particle",
            Self::Pendulum => "pendulum",
            Self::Free => "free",
            Self::Harmonic => "harmonic",
            Self::NonholonomicTest => "nonholonomic-test",
            Self::HolonomicTest => "holonomic-test",
        }
    }

    fn dim(self) -> usize {
        if self == Self::Harmonic {
            1
        } else {
            2
        }
    }

    /// Default continuous initial data `(q, qdot)`.
    fn default_initial(self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Particle => (vec![0.0, 0.0], vec![1.0, 1.0]),
            Self::Pendulum => (vec![0.5, 0.0], vec![0.0, 0.5]),
            Self::Free => (vec![0.0, 0.0], vec![1.0, 0.5]),
            Self::Harmonic => (vec![1.0], vec![0.0]),
            Self::NonholonomicTest => (vec![0.5, 0.0], vec![1.0, -0.5]),
            Self::HolonomicTest => (vec![0.5, 0.2], vec![0.5, 0.0]),
        }
    }

    fn default_t_end(self) -> f64 {
        match self {
            Self::Particle => 500.0,
            Self::Pendulum => 2000.0,
            _ => 100.0,
        }
    }

    fn default_h_list(self) -> Vec<f64> {
        match self {
            Self::Particle => vec![0.2, 0.1, 0.05, 0.025],
            Self::Pendulum => vec![0.2, 0.1, 0.05],
            _ => vec![0.1, 0.05, 0.025],
        }
    }
}

/// How the first two points are obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum Seed {
    /// `(q, q + h qdot)`.
    Continuous { q: Vector, qdot: Vector },
    Pair(ConfigPair),
}

impl Seed {
    pub fn pair(&self, h: f64) -> Result<ConfigPair> {
        match self {
            Seed::Continuous { q, qdot } => seed_from_continuous(q, qdot, h),
            Seed::Pair(p) => Ok(p.clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub system: SystemKind,
    pub h: f64,
    pub steps: usize,
    pub t_end: f64,
    pub h_list: Vec<f64>,
    pub coordinate: usize,
    pub seed: Seed,
    pub out: Option<PathBuf>,
    pub stepper: StepperConfig,
    pub generic_stepper: bool,
    pub samples: usize,
    pub particle: ParticleParams,
    pub pendulum: PendulumParams,
}

pub(crate) fn config_error(message: String) -> Error {
    Error::Config { line: 0, message }
}

fn vector_at(cfg: &Config, key: &str, dim: usize) -> Result<Option<Vector>> {
    let Some(text) = cfg.get(key) else { return Ok(None) };
    let v = parse_vector(text)?;
    if v.len() != dim {
        return Err(config_error(format!("`{key}` needs {dim} components, got {}", v.len())));
    }
    Ok(Some(Vector::from_vec(v)))
}

fn positive(value: f64, key: &str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(config_error(format!("`{key}` must be positive, got {value}")))
    }
}

impl RunConfig {
    /// Validates a merged configuration; unknown keys are rejected.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        if let Some(key) = cfg.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(config_error(format!("unknown key `{key}`")));
        }
        let system = SystemKind::parse(cfg.get("system").unwrap_or("particle"))?;
        let h = positive(cfg.parsed("h")?.unwrap_or(0.1), "h")?;
        let t_end = positive(cfg.parsed("t_end")?.unwrap_or_else(|| system.default_t_end()), "t_end")?;
        let steps = match cfg.parsed::<usize>("steps")? {
            Some(0) => return Err(config_error("`steps` must be at least 1".into())),
            Some(n) => n,
            None => steps_for(h, t_end).map_err(|e| config_error(e.to_string()))?,
        };
        let h_list = match cfg.get("h_list") {
            Some(text) => parse_h_list(text)?,
            None => system.default_h_list(),
        };
        let dim = system.dim();
        let coordinate = cfg.parsed("coordinate")?.unwrap_or(0);
        if coordinate >= dim {
            return Err(config_error(format!("coordinate {coordinate} out of range for dimension {dim}")));
        }

        let continuous = cfg.get("seed.q").is_some() || cfg.get("seed.qdot").is_some();
        let explicit = cfg.get("seed.q0").is_some() || cfg.get("seed.q1").is_some();
        let seed = match (continuous, explicit) {
            (true, true) => return Err(config_error("give either seed.q/seed.qdot or seed.q0/seed.q1".into())),
            (_, true) => {
                let q0 = vector_at(cfg, "seed.q0", dim)?.ok_or_else(|| config_error("seed.q1 given without seed.q0".into()))?;
                let q1 = vector_at(cfg, "seed.q1", dim)?.ok_or_else(|| config_error("seed.q0 given without seed.q1".into()))?;
                Seed::Pair(ConfigPair::new(q0, q1))
            }
            _ => {
                let (q, qdot) = system.default_initial();
                Seed::Continuous {
                    q: vector_at(cfg, "seed.q", dim)?.unwrap_or_else(|| Vector::from_vec(q)),
                    qdot: vector_at(cfg, "seed.qdot", dim)?.unwrap_or_else(|| Vector::from_vec(qdot)),
                }
            }
        };

        let mut stepper = StepperConfig::default();
        if let Some(s) = cfg.get("selection") {
            stepper.selection = s.parse::<Selection>().map_err(|e| config_error(e.to_string()))?;
        }
        stepper.keep_degenerate_roots = cfg.parsed("keep_degenerate_roots")?.unwrap_or(false);
        stepper.scan_lo = cfg.parsed("scan.lo")?.unwrap_or(stepper.scan_lo);
        stepper.scan_hi = cfg.parsed("scan.hi")?.unwrap_or(stepper.scan_hi);
        stepper.scan_points = cfg.parsed("scan.points")?.unwrap_or(stepper.scan_points);
        stepper.solve.tolerance = cfg.parsed("solver.tolerance")?.unwrap_or(stepper.solve.tolerance);
        stepper.solve.max_iterations = cfg.parsed("solver.max_iterations")?.unwrap_or(stepper.solve.max_iterations);
        stepper.solve.fd_epsilon = cfg.parsed("solver.fd_epsilon")?.unwrap_or(stepper.solve.fd_epsilon);
        stepper.validate().map_err(|e| config_error(e.to_string()))?;

        let particle = ParticleParams::constant_curvature(
            cfg.parsed("particle.k")?.unwrap_or(1.0),
            cfg.parsed("particle.mass")?.unwrap_or(1.0),
            h,
        );
        particle.validate().map_err(|e| config_error(e.to_string()))?;
        let d = PendulumParams::default();
        let pendulum = PendulumParams {
            inertia_i: cfg.parsed("pendulum.inertia_i")?.unwrap_or(d.inertia_i),
            inertia_j: cfg.parsed("pendulum.inertia_j")?.unwrap_or(d.inertia_j),
            m_g: cfg.parsed("pendulum.m_g")?.unwrap_or(d.m_g),
            d: cfg.parsed("pendulum.d")?.unwrap_or(d.d),
            e: cfg.parsed("pendulum.e")?.unwrap_or(d.e),
            chi: cfg.parsed("pendulum.chi")?.unwrap_or(d.chi),
            rho: cfg.parsed("pendulum.rho")?.unwrap_or(d.rho),
            n: cfg.parsed("pendulum.n")?.unwrap_or(d.n),
            h,
        };
        pendulum.validate().map_err(|e| config_error(e.to_string()))?;

        Ok(Self {
            system,
            h,
            steps,
            t_end,
            h_list,
            coordinate,
            seed,
            out: cfg.get("out").map(PathBuf::from),
            stepper,
            generic_stepper: cfg.parsed("generic_stepper")?.unwrap_or(false),
            samples: cfg.parsed("diagnose.samples")?.unwrap_or(20),
            particle,
            pendulum,
        })
    }

    /// The discrete system at step `h` with the configured parameters.
    pub fn build(&self, h: f64) -> Result<DiscreteSystem> {
        match self.system {
            SystemKind::Particle => make_particle(&self.particle.with_step(h)),
            SystemKind::Pendulum if self.generic_stepper => make_pendulum_generic(&self.pendulum.with_step(h)),
            SystemKind::Pendulum => make_pendulum(&self.pendulum.with_step(h)),
            other => test_system_by_name(other.name(), h),
        }
    }

    pub fn seed_pair(&self, h: f64) -> Result<ConfigPair> {
        self.seed.pair(h)
    }
}
