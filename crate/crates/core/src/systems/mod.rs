//! Concrete discrete systems.

pub mod catalog;
pub mod particle;
pub mod pendulum;
mod select;

pub use catalog::{make_test_systems, test_system_by_name, TestSystems};
pub use particle::{make_particle, particle_continuous, particle_seed, signed_curvature, ParticleParams};
pub use pendulum::{
    make_pendulum, make_pendulum_generic, pendulum_initial_state, pendulum_seed, Factored, LyapunovPair, PendulumParams,
    ReducedEquation,
};
pub use select::{select_root, TIE_TOLERANCE};
