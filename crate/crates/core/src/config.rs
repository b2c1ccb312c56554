use serde::{Deserialize, Serialize};

use crate::geometry::Position;
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KillMode {
    #[default]
    Off,
    LinearFront,
}

/// Kills a particle at an observation time `s` when `R_s < √2·s − offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneRule {
    pub offset: f64,
    pub mode: KillMode,
}

impl PruneRule {
    pub fn off() -> Self {
        Self { offset: f64::INFINITY, mode: KillMode::Off }
    }

    pub fn linear_front(offset: f64) -> Self {
        Self { offset, mode: KillMode::LinearFront }
    }

    /// Linear front with offset `4√t`.
    pub fn default_for(horizon: f64) -> Self {
        Self::linear_front(4.0 * horizon.sqrt())
    }

    pub fn is_on(&self) -> bool {
        self.mode == KillMode::LinearFront
    }

    pub fn kills(&self, r: f64, s: f64) -> bool {
        self.is_on() && r < std::f64::consts::SQRT_2 * s - self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub d: usize,
    pub horizon_t: f64,
    pub observation_times: Vec<f64>,
    pub seed: u64,
    pub pruning: Option<PruneRule>,
    pub start_position: Position,
}

impl RunConfig {
    /// Origin start, no pruning, single observation at the horizon.
    pub fn new(d: usize, horizon_t: f64, seed: u64) -> Self {
        Self {
            d,
            horizon_t,
            observation_times: vec![horizon_t],
            seed,
            pruning: None,
            start_position: Position::origin(d.max(1)),
        }
    }

    /// Sets the observation times; they are sorted, deduplicated and the
    /// horizon is appended if missing.
    pub fn with_observation_times(mut self, mut times: Vec<f64>) -> Self {
        times.push(self.horizon_t);
        times.sort_by(|a, b| a.total_cmp(b));
        times.dedup();
        self.observation_times = times;
        self
    }

    pub fn with_pruning(mut self, rule: PruneRule) -> Self {
        self.pruning = if rule.is_on() { Some(rule) } else { None };
        self
    }

    pub fn with_start(mut self, start: Position) -> Self {
        self.start_position = start;
        self
    }

    pub fn prune_rule(&self) -> PruneRule {
        self.pruning.unwrap_or_else(PruneRule::off)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoreError::InvalidConfig(m.to_string()));
        if self.d < 1 {
            return bad("d must be >= 1");
        }
        if !(self.horizon_t > 0.0) || !self.horizon_t.is_finite() {
            return bad("horizon must be positive and finite");
        }
        if self.start_position.dim() != self.d {
            return Err(CoreError::DimensionMismatch {
                expected: self.d,
                got: self.start_position.dim(),
            });
        }
        if self.start_position.coords.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::NonFinite);
        }
        let obs = &self.observation_times;
        if obs.iter().any(|&s| !(0.0..=self.horizon_t).contains(&s)) {
            return bad("observation times must lie in [0, horizon]");
        }
        if obs.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("observation times must be sorted and unique");
        }
        if obs.last() != Some(&self.horizon_t) {
            return bad("observation times must include the horizon");
        }
        if let Some(p) = self.pruning {
            if p.is_on() && !(p.offset > 0.0) {
                return bad("prune offset must be positive");
            }
        }
        Ok(())
    }
}
