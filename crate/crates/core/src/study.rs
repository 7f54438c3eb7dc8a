//! Rate studies and high-probability bound sweeps over many seeds.
//!
//! Constant step sizes depend on `T`, so every horizon is re-prescribed and
//! re-run from scratch rather than read off a prefix of one long run.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::agd::{run, AgdPolicy, PolicyKind, RunOptions};
use crate::analysis::{avg_sq_grad, averaged_iterate_gap, bound_sweep, loglog_slope, median, quantile_nearest_rank, BoundSweep, RateFit, Trajectory};
use crate::config::RunConfig;
use crate::constants::{adaptive_smooth_constants, step_size_adaptive_bound, step_size_constant, Regime, TheoryConstants};
use crate::error::{AgdError, Result};
use crate::noise::{NoiseSpec, StochasticOracle};
use crate::problems::{by_name, Problem};
use crate::rng::RandomStream;
use crate::sweep::{map_seeds, seed_range};
use crate::vector::Vector;

/// A shipped problem by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
}

impl ProblemSpec {
    pub fn new(name: &str, dim: usize) -> Self {
        ProblemSpec {
            name: name.to_owned(),
            dim,
            curvature: None,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        by_name(&self.name, self.dim, self.curvature)
    }
}

/// Where the step size comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    /// A fixed `η` (the base step for adaptive kinds).
    Fixed { eta: f64 },
    /// The step prescribed by the theory for `regime` at each horizon:
    /// `η(T)` for constant regimes, `η_max(T)` for the adaptive one.
    Theorem { regime: Regime },
}

/// Per-run scalar the rate is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `(1/T) Σ ‖∇f(x̄_t)‖²`.
    AvgSqGrad,
    /// `f((1/T) Σ x̄_t) − f*`.
    AveragedIterateGap,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::AvgSqGrad => "avg_sq_grad",
            Metric::AveragedIterateGap => "averaged_iterate_gap",
        }
    }

    pub fn evaluate(&self, traj: &Trajectory, p: &Problem) -> Result<f64> {
        match self {
            Metric::AvgSqGrad => avg_sq_grad(traj),
            Metric::AveragedIterateGap => averaged_iterate_gap(traj, p),
        }
    }
}

fn default_g0() -> f64 {
    1.0
}

fn default_start_scale() -> f64 {
    1.0
}

/// One (problem, method, noise, step rule) experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub problem: ProblemSpec,
    pub kind: PolicyKind,
    pub noise: NoiseSpec,
    pub step: StepRule,
    #[serde(default = "default_g0")]
    pub g0: f64,
    /// Start point `x_1 = start_scale · (1, …, 1)`.
    #[serde(default = "default_start_scale")]
    pub start_scale: f64,
    pub delta: f64,
}

/// A prescribed policy together with the constants behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prescription {
    pub policy: AgdPolicy,
    pub constants: Option<TheoryConstants>,
}

impl Experiment {
    pub fn start(&self) -> Vector {
        Vector::filled(self.problem.dim, self.start_scale)
    }

    /// `η` for horizon `t` plus the constants that produced it.
    pub fn prescribe(&self, p: &Problem, horizon: usize) -> Result<Prescription> {
        let start = self.start();
        let delta1 = p.gap(&start);
        let cfg = RunConfig::new(horizon, self.delta, 0, p.dim())?;
        let dist_sq = p.x_star().map(|xs| start.distance(xs).powi(2));
        let (eta, mut constants) = match self.step {
            StepRule::Fixed { eta } => {
                let k = match p.smoothness() {
                    crate::problems::SmoothnessSpec::LSmooth { .. } if self.kind.is_adaptive() => Some(adaptive_smooth_constants(
                        p,
                        &self.noise,
                        &cfg,
                        delta1,
                        self.g0,
                        eta,
                        p.gradient(&start).norm(),
                    )?),
                    _ => None,
                };
                (eta, k)
            }
            StepRule::Theorem { regime } if regime.is_adaptive() => {
                if regime != Regime::AdaptiveGs {
                    return Err(AgdError::invalid("regime", format!("{} admits any η; use a fixed step", regime.name())));
                }
                let (eta, k) = step_size_adaptive_bound(p, &self.noise, &cfg, delta1, self.g0)?;
                (eta, Some(k))
            }
            StepRule::Theorem { regime } => {
                let (eta, k) = step_size_constant(regime, p, &self.noise, &cfg, delta1)?;
                (eta, Some(k))
            }
        };
        if let (Some(k), Some(d)) = (constants.as_mut(), dist_sq) {
            k.complete_radius(d)?;
        }
        Ok(Prescription {
            policy: AgdPolicy::new(self.kind, eta, self.g0)?,
            constants,
        })
    }

    /// Runs one seed at one horizon.
    pub fn run_seed(&self, p: &Problem, policy: &AgdPolicy, horizon: usize, seed: u64) -> Result<Trajectory> {
        let cfg = RunConfig::new(horizon, self.delta, seed, p.dim())?;
        let mut oracle = StochasticOracle::new(p.clone(), self.noise, RandomStream::new(seed, "noise"))?;
        run(&mut oracle, policy, &cfg, &RunOptions::from_start(self.start()))
    }
}

/// A rate study: one experiment over several horizons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub experiment: Experiment,
    pub metric: Metric,
    pub horizons: Vec<usize>,
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Acceptance window for the fitted slope of the median.
    pub window: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonRow {
    pub horizon: usize,
    pub eta: f64,
    pub median: f64,
    /// Empirical `(1 − δ)`-quantile across seeds.
    pub upper_quantile: f64,
    pub diverged: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub study: RateStudy,
    pub rows: Vec<HorizonRow>,
    pub median_fit: Option<RateFit>,
    pub quantile_fit: Option<RateFit>,
    pub passed: bool,
}

impl RateReport {
    pub fn median_slope(&self) -> Option<f64> {
        self.median_fit.as_ref().map(|f| f.slope)
    }

    /// Plain-text summary; identical inputs give identical text.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let e = &self.study.experiment;
        let _ = writeln!(
            s,
            "# {} {}{} noise=({}, {}, {}, {}) metric={}",
            e.kind.name(),
            e.problem.name,
            e.problem.dim,
            e.noise.a,
            e.noise.b,
            e.noise.c,
            e.noise.mode.name(),
            self.study.metric.name()
        );
        let _ = writeln!(s, "T,eta,median,upper_quantile,diverged");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:e},{:e},{:e},{}", r.horizon, r.eta, r.median, r.upper_quantile, r.diverged);
        }
        let fmt = |f: &Option<RateFit>| f.as_ref().map_or("n/a".to_owned(), |f| format!("{:.4} (r2 {:.4})", f.slope, f.r_squared));
        let (lo, hi) = self.study.window;
        let _ = writeln!(
            s,
            "slope(median)={} slope(quantile)={} window=[{lo}, {hi}] {}",
            fmt(&self.median_fit),
            fmt(&self.quantile_fit),
            if self.passed { "PASS" } else { "FAIL" }
        );
        s
    }
}

fn fit(rows: &[HorizonRow], pick: impl Fn(&HorizonRow) -> f64) -> Option<RateFit> {
    let pts: Vec<(usize, f64)> = rows.iter().map(|r| (r.horizon, pick(r))).collect();
    loglog_slope(&pts).ok()
}

pub fn run_rate_study(study: &RateStudy) -> Result<RateReport> {
    if study.horizons.len() < 3 {
        return Err(AgdError::invalid("horizons", "a rate study needs at least 3 horizons"));
    }
    if study.seeds == 0 {
        return Err(AgdError::invalid("seeds", "must be positive"));
    }
    let e = &study.experiment;
    let p = e.problem.build()?;
    let seeds = seed_range(study.base_seed, study.seeds);
    let mut rows = Vec::with_capacity(study.horizons.len());
    for &horizon in &study.horizons {
        let pres = e.prescribe(&p, horizon)?;
        let outcomes = map_seeds(&seeds, |s| match e.run_seed(&p, &pres.policy, horizon, s) {
            Ok(traj) => study.metric.evaluate(&traj, &p).map(Some),
            Err(AgdError::Diverged { .. }) => Ok(None),
            Err(err) => Err(err),
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let diverged = outcomes.iter().filter(|o| o.is_none()).count();
        let values: Vec<f64> = outcomes.into_iter().map(|o| o.unwrap_or(f64::INFINITY)).collect();
        rows.push(HorizonRow {
            horizon,
            eta: pres.policy.eta,
            median: median(&values)?,
            upper_quantile: quantile_nearest_rank(&values, 1.0 - e.delta)?,
            diverged,
            values,
        });
    }
    let median_fit = fit(&rows, |r| r.median);
    let quantile_fit = fit(&rows, |r| r.upper_quantile);
    let (lo, hi) = study.window;
    let passed = median_fit.as_ref().map_or(false, |f| f.within(lo, hi));
    Ok(RateReport {
        study: study.clone(),
        rows,
        median_fit,
        quantile_fit,
        passed,
    })
}

/// Seed sweep of `max_t Δ̄_t` against the trajectory bound of a regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundStudy {
    pub experiment: Experiment,
    pub horizon: usize,
    pub seeds: usize,
    #[serde(default)]
    pub base_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub study: BoundStudy,
    pub eta: f64,
    pub bound: f64,
    pub max_gaps: Vec<f64>,
    pub sweep: BoundSweep,
}

impl BoundReport {
    pub fn table(&self) -> String {
        let e = &self.study.experiment;
        let worst = self.max_gaps.iter().cloned().fold(0.0, f64::max);
        format!(
            "# {} {}{} T={} seeds={}\neta={:e} bound={:e} worst_max_gap={:e} within={}/{} allowed_failures={} {}\n",
            e.kind.name(),
            e.problem.name,
            e.problem.dim,
            self.study.horizon,
            self.sweep.runs,
            self.eta,
            self.bound,
            worst,
            self.sweep.runs - self.sweep.failures,
            self.sweep.runs,
            self.sweep.allowed_failures,
            if self.sweep.passed { "PASS" } else { "FAIL" }
        )
    }
}

pub fn run_bound_study(study: &BoundStudy) -> Result<BoundReport> {
    let e = &study.experiment;
    let p = e.problem.build()?;
    let pres = e.prescribe(&p, study.horizon)?;
    let k = pres
        .constants
        .as_ref()
        .ok_or_else(|| AgdError::invalid("step", "a bound study needs a theorem-prescribed step"))?;
    let bound = match k.regime {
        Some(Regime::NonconvexGs) | Some(Regime::ConvexGs) => k.g_c,
        Some(Regime::AdaptiveGs) => k.g_a,
        Some(Regime::AdaptiveSmooth) => k.g_l,
        _ => k.g_e,
    }
    .ok_or_else(|| AgdError::invalid("step", "regime has no trajectory bound"))?;
    let seeds = seed_range(study.base_seed, study.seeds);
    let gaps = map_seeds(&seeds, |s| match e.run_seed(&p, &pres.policy, study.horizon, s) {
        Ok(traj) => Ok(traj.max_delta_bar()),
        Err(AgdError::Diverged { .. }) => Ok(f64::INFINITY),
        Err(err) => Err(err),
    });
    let max_gaps = gaps.into_iter().collect::<Result<Vec<_>>>()?;
    let within: Vec<bool> = max_gaps.iter().map(|g| *g <= bound).collect();
    Ok(BoundReport {
        study: study.clone(),
        eta: pres.policy.eta,
        bound,
        sweep: bound_sweep(&within, e.delta)?,
        max_gaps,
    })
}
