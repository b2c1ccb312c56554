//! The directional derivative martingale `D_t(θ)` of branching Brownian
//! motion, quadrature on the unit sphere, the window statistic `Z_t` with
//! its frontier weights, and the Laplace-method kernel.

mod bessel;
mod error;
mod field;
mod grid;
mod kernel;
mod window;

pub use bessel::{affine_pair_integral, affine_pair_parts, scaled_bessel, scaled_bessel_triple};
pub use error::MartingaleError;
pub use field::{derivative_martingale, pair_integral, MartingaleField};
pub use grid::{default_grid, DirectionGrid, GridKind, DEFAULT_D3_DEGREE, DEFAULT_RANDOM_NODES};
pub use kernel::{
    bad_band_constant, kernel_asymptotic, kernel_integral, kernel_ratio_table, laplace_prefactor,
    max_ratio_deviation, write_ratio_table, KernelBand, Prefactor,
};
pub use window::{
    frontier_weight, non_window_sum, weighted_window_sum, window_bounds, window_select, z_statistic,
};

pub type Result<T> = std::result::Result<T, MartingaleError>;
