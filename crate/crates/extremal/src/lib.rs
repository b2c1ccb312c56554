//! Extremal statistics of a branching Brownian motion snapshot: the centring
//! `m_t^(d)`, the extremal point process, clans and their decorations, and
//! the angular-stability diagnostics for ancestors of extremal particles.

mod angular;
mod centring;
mod clans;
mod error;
mod export;
mod process;

pub use angular::{
    angle_bound_certificate, angle_bound_numeric, angular_stability_fraction, angular_threshold,
    AngularStability,
};
pub use centring::centring;
pub use clans::{clan_partition, decoration_of, Clan, Decoration};
pub use error::ExtremalError;
pub use export::{write_extremal_csv, CSV_SCHEMA};
pub use process::{extremal_process, rmax, ExtremalPoint, ExtremalProcess};

pub type Result<T> = std::result::Result<T, ExtremalError>;
