//! Shared domain types for branching Brownian motion in ℝ^d.
//!
//! Everything downstream (the simulator, the extremal-process statistics,
//! the derivative martingale and the verification harness) speaks in terms
//! of the types defined here:
//!
//! - [`Position`] / [`PolarPoint`] and the sphere geometry helpers,
//! - [`Genealogy`], an append-only binary tree of [`ParticleRecord`]s,
//! - [`Snapshot`], the positions of all particles alive at one time,
//! - [`RunConfig`] and [`PruneRule`],
//! - [`CounterRng`], the keyed stream generator used to make runs
//!   reproducible independently of scheduling.

pub mod config;
pub mod error;
pub mod genealogy;
pub mod geometry;
pub mod records;
pub mod rng;
pub mod snapshot;

pub use config::{KillMode, PruneRule, RunConfig};
pub use error::CoreError;
pub use genealogy::{EndKind, Genealogy, ParticleId, ParticleRecord};
pub use geometry::{
    alpha, dot, norm, polar_decompose, sphere_distance, unit_sphere_volume, PolarPoint, Position,
};
pub use rng::{CounterRng, StreamKey};
pub use snapshot::Snapshot;

pub type Result<T> = std::result::Result<T, CoreError>;
