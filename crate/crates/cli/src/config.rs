//! Experiment configuration: one TOML file (or a manifest that embeds one).
//!
//! ```toml
//! delta = 0.1
//! seeds = 4
//! base_seed = 7
//! horizon = 1000                  # `agd run`
//! horizons = [100, 1000, 10000]   # `agd rates`
//! start_scale = 1.0               # x_1 = start_scale · (1, …, 1)
//! out = "out"
//!
//! [problem]
//! name = "exp_symmetric"
//! dim = 10
//!
//! [policy]
//! kind = "rsag_const"
//! g0 = 1.0
//! step = { rule = "theorem", regime = "nonconvex_gs" }   # or { rule = "fixed", eta = 0.01 }
//!
//! [noise]
//! a = 0.0
//! b = 0.0
//! c = 1.0
//! mode = "almost_sure"
//!
//! [[rates]]
//! metric = "avg_sq_grad"
//! window = [-0.65, -0.35]
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use agd_core::agd::PolicyKind;
use agd_core::noise::NoiseSpec;
use agd_core::study::{Experiment, Metric, ProblemSpec, StepRule};

use crate::manifest::Manifest;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub step: StepRule,
    #[serde(default = "one")]
    pub g0: f64,
}

/// A metric to fit in a rate study and the slope window it must land in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTarget {
    pub metric: Metric,
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub policy: PolicyConfig,
    #[serde(default = "NoiseSpec::noiseless")]
    pub noise: NoiseSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub horizons: Vec<usize>,
    pub delta: f64,
    #[serde(default = "one_seed")]
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "one")]
    pub start_scale: f64,
    /// Output directory; not part of the config hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rates: Vec<RateTarget>,
}

fn one() -> f64 {
    1.0
}

fn one_seed() -> usize {
    1
}

fn field(name: &str, reason: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("invalid config field `{name}`: {reason}")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("failed to parse config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config, or the config embedded in a JSON manifest.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("failed to read {}", path.display()))?;
        let cfg = if path.extension().is_some_and(|e| e == "json") {
            let manifest: Manifest =
                serde_json::from_str(&text).with_context(|| format!("failed to parse manifest {}", path.display()))?;
            manifest.config
        } else {
            toml::from_str(&text).with_context(|| format!("failed to parse config {}", path.display()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(field("delta", format!("must lie in (0, 1), got {}", self.delta)));
        }
        if self.seeds == 0 {
            return Err(field("seeds", "must be at least 1"));
        }
        if self.problem.dim == 0 {
            return Err(field("problem.dim", "must be at least 1"));
        }
        if self.horizon == Some(0) {
            return Err(field("horizon", "must be at least 1"));
        }
        if self.horizons.contains(&0) {
            return Err(field("horizons", "every horizon must be at least 1"));
        }
        if !(self.start_scale.is_finite()) {
            return Err(field("start_scale", "must be finite"));
        }
        if !(self.policy.g0 > 0.0 && self.policy.g0.is_finite()) {
            return Err(field("policy.g0", format!("must be positive, got {}", self.policy.g0)));
        }
        if let StepRule::Fixed { eta } = self.policy.step {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(field("policy.step.eta", format!("must be positive, got {eta}")));
            }
        }
        self.noise.validate().map_err(|e| field("noise", e))?;
        for (i, r) in self.rates.iter().enumerate() {
            if !(r.window.0 < r.window.1) {
                return Err(field(&format!("rates[{i}].window"), "lower end must be below upper end"));
            }
        }
        self.problem.build().map_err(|e| field("problem", e))?;
        Ok(())
    }

    pub fn experiment(&self) -> Experiment {
        Experiment {
            problem: self.problem.clone(),
            kind: self.policy.kind,
            noise: self.noise,
            step: self.policy.step,
            g0: self.policy.g0,
            start_scale: self.start_scale,
            delta: self.delta,
        }
    }

    pub fn horizon(&self) -> Result<usize> {
        self.horizon.ok_or_else(|| field("horizon", "required for `run`"))
    }

    pub fn seed_list(&self) -> Vec<u64> {
        agd_core::sweep::seed_range(self.base_seed, self.seeds)
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig { out: None, ..self.clone() };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Applies command-line overrides and re-validates.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = o.seeds {
            self.seeds = s;
        }
        if let Some(d) = o.delta {
            self.delta = d;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        self.validate()
    }

    pub fn out_dir(&self) -> Result<&Path> {
        match &self.out {
            Some(p) => Ok(p),
            None => bail!("no output directory: set `out` in the config or pass --out"),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seeds: Option<usize>,
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
}
