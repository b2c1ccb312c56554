//! Statistical harness: reduces simulated replicas to [`RunSummary`] records
//! and turns the limit theorems for branching Brownian motion into
//! desk-scale tests with pre-registered tolerances.

mod ancestry;
pub mod controls;
mod error;
mod gumbel;
mod lalley;
mod laplace;
mod protocol;
mod report;
pub mod stats;
mod suite;
mod summary;

pub use ancestry::{
    angular_exceedance, is_decreasing, pairing_ratios, window_necessity_check, AngularExceedance, PairingStats,
    WindowNecessity,
};
pub use error::VerifyError;
pub use gumbel::{gumbel_tail_fit, survival_slope, GumbelFit, TailWindow, MIN_TAIL_SAMPLES};
pub use lalley::{lalley_sellke_check, LalleyBin, LalleySellke};
pub use laplace::{frak_c, laplace_compare, laplace_lhs, laplace_rhs, LaplaceComparison, Phi};
pub use protocol::{Protocol, PROTOCOL_FILE};
pub use report::{ReportBundle, TestReport, Verdict};
pub use stats::{bootstrap_ci, linear_fit, Interval, LinearFit};
pub use suite::{
    angular_report, lalley_report, laplace_reports, leader_tail_report, max_tail_report, pairing_report,
    registry_value, statistical_suite, window_report, C_PHI_NAME, GAMMA_KEY,
};
pub use summary::{
    common_shape, read_summaries, summarize, write_summaries, AncestorInfo, ObsSummary, RunSummary, SummaryOptions,
    TopParticle,
};

pub type Result<T> = std::result::Result<T, VerifyError>;
