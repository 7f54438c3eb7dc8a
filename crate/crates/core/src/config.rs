use serde::{Deserialize, Serialize};

use crate::error::{AgdError, Result};

/// Horizon, confidence level, seed and dimension of a single run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub horizon: usize,
    pub delta: f64,
    pub seed: u64,
    pub dim: usize,
}

impl RunConfig {
    pub fn new(horizon: usize, delta: f64, seed: u64, dim: usize) -> Result<Self> {
        let cfg = RunConfig {
            horizon,
            delta,
            seed,
            dim,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(AgdError::invalid("horizon", "must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(AgdError::invalid(
                "delta",
                format!("must lie in (0, 1), got {}", self.delta),
            ));
        }
        if self.dim == 0 {
            return Err(AgdError::invalid("dim", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        RunConfig { seed, ..self }
    }

    pub fn with_horizon(self, horizon: usize) -> Self {
        RunConfig { horizon, ..self }
    }

    /// `log(T/δ)`, the confidence term that recurs in every bound.
    pub fn log_t_over_delta(&self) -> f64 {
        (self.horizon as f64 / self.delta).ln()
    }
}
