use thiserror::Error;

use crate::analysis::Trajectory;

pub type Result<T> = std::result::Result<T, AgdError>;

#[derive(Debug, Error)]
pub enum AgdError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A non-finite value appeared at iteration `t`. The records produced
    /// before the failure are kept in `partial`.
    #[error("run diverged at t = {t}: {what}")]
    Diverged {
        t: usize,
        what: &'static str,
        partial: Box<Trajectory>,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("smoothness kind mismatch: {0}")]
    KindMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("adaptive policy `{0}` requires an AdaGrad accumulator")]
    MissingAccumulator(&'static str),

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("all sampled noise bounds were zero")]
    DegenerateNoise,
}

impl AgdError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        AgdError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(AgdError::invalid(name, format!("must be positive and finite, got {value}")))
    }
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(AgdError::invalid(name, format!("must be nonnegative and finite, got {value}")))
    }
}
