//! Step-size state machines.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, AgdError, Result};

/// Scalar AdaGrad-Norm accumulator:
/// `G_t² = G_0² + Σ_{k≤t} ‖g_k‖²`, `η_t = η / G_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaGradAccumulator {
    eta: f64,
    g0_sq: f64,
    g_sq: f64,
}

impl AdaGradAccumulator {
    pub fn new(eta: f64, g0: f64) -> Result<Self> {
        ensure_positive("eta", eta)?;
        ensure_positive("G0", g0)?;
        Ok(AdaGradAccumulator {
            eta,
            g0_sq: g0 * g0,
            g_sq: g0 * g0,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn g0_sq(&self) -> f64 {
        self.g0_sq
    }

    /// Current `G_t²`.
    pub fn g_sq(&self) -> f64 {
        self.g_sq
    }

    /// `η / G_t` for the current accumulator value.
    pub fn current_step(&self) -> f64 {
        self.eta / self.g_sq.sqrt()
    }

    /// Absorbs `‖g_t‖²` and returns `η_t`, which already includes it.
    pub fn absorb(&mut self, g_sq: f64) -> Result<f64> {
        if !(g_sq >= 0.0) || !g_sq.is_finite() {
            return Err(AgdError::NegativeEntry { index: 0, value: g_sq });
        }
        self.g_sq += g_sq;
        Ok(self.current_step())
    }
}

/// Functional form of [`AdaGradAccumulator::absorb`].
pub fn adagrad_step(acc: AdaGradAccumulator, g_sq: f64) -> Result<(f64, AdaGradAccumulator)> {
    let mut next = acc;
    let eta_t = next.absorb(g_sq)?;
    Ok((eta_t, next))
}

/// Step-size source for one run: a constant, or AdaGrad-Norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepSchedule {
    Constant(f64),
    AdaGrad(AdaGradAccumulator),
}

impl StepSchedule {
    /// Feeds `‖g_t‖²` and returns `(η_t, G_{t−1}², G_t²)`. Constant
    /// schedules report zero accumulators.
    pub fn advance(&mut self, g_sq: f64) -> Result<(f64, f64, f64)> {
        match self {
            StepSchedule::Constant(eta) => Ok((*eta, 0.0, 0.0)),
            StepSchedule::AdaGrad(acc) => {
                let before = acc.g_sq();
                let eta_t = acc.absorb(g_sq)?;
                Ok((eta_t, before, acc.g_sq()))
            }
        }
    }

    pub fn accumulator(&self) -> Option<&AdaGradAccumulator> {
        match self {
            StepSchedule::Constant(_) => None,
            StepSchedule::AdaGrad(acc) => Some(acc),
        }
    }
}
