use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::gumbel::TailWindow;
use crate::laplace::Phi;
use crate::{Result, VerifyError};

pub const PROTOCOL_FILE: &str = "protocol.json";

/// Tolerances, windows and test parameters, fixed before any data is read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Protocol {
    pub schema: u32,
    pub level: f64,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
    pub tail_window: TailWindow,
    /// Relative band around `−√2` for the tail slopes.
    pub slope_tolerance: f64,
    pub lalley_l: f64,
    pub lalley_bins: usize,
    pub lalley_probes: Vec<f64>,
    pub lalley_ceiling: f64,
    pub laplace_l: f64,
    pub laplace_phis: Vec<Phi>,
    pub window_y: f64,
    pub window_ls: Vec<f64>,
    pub angular_y: f64,
    pub angular_ls: Vec<f64>,
    pub angular_ceiling: f64,
    pub pairing_ls: Vec<f64>,
    pub pairing_band: (f64, f64),
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            schema: 1,
            level: 0.95,
            bootstrap_resamples: crate::stats::DEFAULT_RESAMPLES,
            bootstrap_seed: 0xb007,
            tail_window: TailWindow::default(),
            slope_tolerance: 0.15,
            lalley_l: 6.0,
            lalley_bins: 5,
            lalley_probes: vec![-1.0, 0.0, 1.0, 2.0],
            lalley_ceiling: 0.08,
            laplace_l: 6.0,
            laplace_phis: vec![Phi { a: 1.0, x0: 0.0, width: 0.5 }, Phi { a: 2.0, x0: 1.0, width: 0.5 }],
            window_y: 0.0,
            window_ls: vec![4.0, 6.0, 8.0],
            angular_y: 0.0,
            angular_ls: vec![4.0, 6.0, 8.0],
            angular_ceiling: 0.05,
            pairing_ls: vec![8.0, 12.0],
            pairing_band: (0.7, 1.4),
        }
    }
}

impl Protocol {
    /// Writes the protocol into `dir`, or checks it against the one already
    /// there. A different protocol is refused unless `allow_change` is set.
    pub fn register(&self, dir: &Path, allow_change: bool) -> Result<()> {
        let path = dir.join(PROTOCOL_FILE);
        if path.exists() {
            let old: Protocol = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
            if old == *self {
                return Ok(());
            }
            if !allow_change {
                return Err(VerifyError::ProtocolChanged { path: path.display().to_string() });
            }
        }
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Option<Protocol>> {
        let path = dir.join(PROTOCOL_FILE);
        if !path.exists() {
            return Ok(None);
        }
        Ok(Some(serde_json::from_str(&std::fs::read_to_string(path)?)?))
    }
}
