//! The JSON manifest written next to every run or rate study. It embeds the
//! full config, so `agd <cmd> --config manifest.json` reproduces the tables.

use serde::{Deserialize, Serialize};

use agd_core::constants::{extended_real, TheoryConstants};
use agd_core::study::Metric;

use crate::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Run,
    Rates,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: CommandKind,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub prescriptions: Vec<PrescriptionRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<RunRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rates: Vec<RateRecord>,
}

/// Step size for one horizon and the constants it came from (absent for a
/// fixed step on a problem without closed-form constants).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrescriptionRecord {
    pub horizon: usize,
    pub eta: f64,
    pub constants: Option<TheoryConstants>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    /// A non-finite value appeared at iteration `t`; the table holds the
    /// rows produced before it.
    Diverged { t: usize, what: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub horizon: usize,
    pub table: String,
    pub rows: usize,
    #[serde(flatten)]
    pub status: RunStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub horizon: usize,
    pub eta: f64,
    #[serde(with = "extended_real")]
    pub median: f64,
    #[serde(with = "extended_real")]
    pub upper_quantile: f64,
    pub diverged: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRecord {
    pub metric: Metric,
    pub window: (f64, f64),
    pub slope_median: Option<f64>,
    pub slope_quantile: Option<f64>,
    pub passed: bool,
    pub rows: Vec<RateRow>,
}
