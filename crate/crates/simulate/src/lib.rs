//! Event-driven simulation of binary branching Brownian motion in ℝ^d.
//!
//! [`simulate_bbm`] is exact: lifetimes are Exponential(1) and motion between
//! events is sampled as independent Gaussian legs, so the only randomness is
//! Monte Carlo noise. [`simulate_coupled`] runs the Bessel-norm process and a
//! one-dimensional Brownian motion on one shared tree, integrating the Bessel
//! SDE by Euler–Maruyama.

mod bbm;
mod coupled;
mod error;

pub use bbm::{
    expected_population, memory_estimate, run_replicas, simulate_bbm, simulate_replica, SimOptions,
    SimOutput, DEFAULT_MEMORY_BUDGET,
};
pub use coupled::{
    coupling_bound, simulate_coupled, simulate_coupled_summary, CoupledOptions, CoupledPath,
    CouplingSummary,
};
pub use error::SimError;

pub type Result<T> = std::result::Result<T, SimError>;
