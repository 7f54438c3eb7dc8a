//! Config-driven experiment runner for `agd-core`.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod tables;

pub use commands::{cmd_rates, cmd_run, cmd_verify, with_jobs, VerifyOptions};
pub use config::{ExperimentConfig, Overrides};
pub use manifest::Manifest;
