//! One-dimensional F-KPP equation `∂_t u = ½∂²_x u + u − u²` solved in a
//! frame moving at speed √2, with front tracking and the tail constants
//! `C_g`, `γ`, `γ*` and `C(φ)`.
//!
//! With `u(0, x) = 1{x < 0}` the solution is `P(W*_t > x)` for the maximum
//! `W*_t` of one-dimensional branching Brownian motion.
//!
//! Space uses fourth-order central differences (second order next to the
//! boundary), time uses Crank–Nicolson after a few backward-Euler half steps,
//! and the logistic reaction `u' = u(1 − u)` is integrated exactly inside a
//! Strang splitting.

mod banded;
mod error;
mod functionals;
mod registry;
mod solver;

pub use error::FkppError;
pub use functionals::{
    c_phi, doubling_ells, extrapolate_inverse_sqrt, fit_front, front_position, gamma_constant, gamma_star, tail_convergence,
    tail_extent, tail_integral, ConvergenceReport, TailMode, TailOptions, TailWeight,
};
pub use registry::{ConstantsRegistry, RegistryEntry};
pub use solver::{
    evolve, evolve_checkpoints, step_profile, Domain, FkppSolution, Scheme, SolverOptions, DEFAULT_DT, DEFAULT_DX,
    DEFAULT_LEFT,
};

pub type Result<T> = std::result::Result<T, FkppError>;
