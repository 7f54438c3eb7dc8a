//! Generic accelerated/adaptive stochastic gradient template.
//!
//! The iteration keeps three coupled sequences `(x_t, x̃_t, x̄_t)`:
//!
//! ```text
//! x̄_t     = α_t x_t + (1 − α_t) x̃_t
//! g_t     = oracle(x̄_t)
//! x_{t+1} = x_t − θ_t g_t
//! x̃_{t+1} = x̄_t − γ_t g_t
//! ```
//!
//! Different `(α_t, θ_t, γ_t)` schedules give SGD, RSAG, Nesterov's method
//! and AdaGrad-Norm (with or without averaging). Around the engine the crate
//! provides test objectives with smoothness certificates, relaxed
//! affine-variance noise oracles, the theory constants that prescribe step
//! sizes, and the analysis tools used to check convergence empirically.

pub mod agd;
pub mod analysis;
pub mod config;
pub mod constants;
pub mod error;
pub mod noise;
pub mod problems;
pub mod rng;
pub mod schedules;
pub mod study;
pub mod sweep;
pub mod vector;
pub mod verify;

pub use agd::{AgdPolicy, IterateState, PolicyKind};
pub use config::RunConfig;
pub use error::{AgdError, Result};
pub use noise::{NoiseMode, NoiseSpec, StochasticOracle};
pub use problems::{Problem, SmoothnessSpec};
pub use rng::RandomStream;
pub use vector::Vector;

/// Library version, stamped into every emitted table and manifest.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
