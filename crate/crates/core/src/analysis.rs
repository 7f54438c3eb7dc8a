//! Trajectory metrics, rate fits, seed aggregation and the scalar
//! inequalities the convergence proofs rest on.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{AgdError, Result};
use crate::problems::Problem;
use crate::vector::Vector;

/// Scalars recorded for iteration `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub t: usize,
    /// `f(x̄_t)`.
    pub f_xbar: f64,
    /// `‖∇f(x̄_t)‖²`.
    pub grad_sq: f64,
    /// `f(x̄_t) − f*`, clamped at zero.
    pub delta_bar: f64,
    /// `‖g_t‖²`.
    pub g_sq: f64,
    pub theta: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub eta_t: f64,
    /// `G_{t−1}²` (zero for constant schedules).
    pub g_sq_prev: f64,
    /// `G_t²` (zero for constant schedules).
    pub g_sq_acc: f64,
    /// `‖x̄_t − x_t‖`.
    pub gap_norm: f64,
    /// `‖x_{t+1} − x_t‖ = θ_t‖g_t‖`.
    pub step_norm: f64,
}

/// `(x_t, x̃_t)` stored at a chosen iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub x: Vector,
    pub x_tilde: Vector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub problem: String,
    pub records: Vec<IterRecord>,
    /// `(1/t) Σ_{k≤t} x̄_k`, maintained incrementally.
    pub xbar_mean: Vector,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn new(problem: &str, dim: usize, capacity: usize) -> Self {
        Trajectory {
            problem: problem.to_owned(),
            records: Vec::with_capacity(capacity),
            xbar_mean: Vector::zeros(dim),
            snapshots: Vec::new(),
        }
    }

    pub fn push(&mut self, record: IterRecord, xbar: &Vector) {
        self.records.push(record);
        let n = self.records.len() as f64;
        let diff = xbar - &self.xbar_mean;
        self.xbar_mean.axpy(1.0 / n, &diff);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn max_delta_bar(&self) -> f64 {
        self.records.iter().map(|r| r.delta_bar).fold(0.0, f64::max)
    }

    pub fn mean_delta_bar(&self) -> Result<f64> {
        mean(self.records.iter().map(|r| r.delta_bar), "trajectory")
    }
}

fn mean(values: impl Iterator<Item = f64>, what: &'static str) -> Result<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for v in values {
        s += v;
        n += 1;
    }
    if n == 0 {
        return Err(AgdError::EmptyInput(what));
    }
    Ok(s / n as f64)
}

/// `(1/T) Σ_t ‖∇f(x̄_t)‖²`.
pub fn avg_sq_grad(traj: &Trajectory) -> Result<f64> {
    mean(traj.records.iter().map(|r| r.grad_sq), "trajectory")
}

/// `f((1/T) Σ_t x̄_t) − f*`.
pub fn averaged_iterate_gap(traj: &Trajectory, p: &Problem) -> Result<f64> {
    if traj.is_empty() {
        return Err(AgdError::EmptyInput("trajectory"));
    }
    Ok(p.value(&traj.xbar_mean) - p.f_star())
}

/// `max_t Δ̄_t ≤ bound`.
pub fn trajectory_bound_check(traj: &Trajectory, bound: f64) -> bool {
    traj.max_delta_bar() <= bound
}

/// Ordinary least squares of `log metric` on `log T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

impl RateFit {
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.slope >= lo && self.slope <= hi
    }
}

pub fn loglog_slope(points: &[(usize, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(AgdError::invalid("points", format!("need at least 3, got {}", points.len())));
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(t, m) in points {
        if t == 0 {
            return Err(AgdError::invalid("points", "T must be positive"));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(AgdError::invalid("points", format!("metric at T = {t} is {m}, must be positive")));
        }
        logs.push(((t as f64).ln(), m.ln()));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AgdError::invalid("points", "all T values are equal"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = logs.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        points: logs,
    })
}

/// Nearest-rank empirical quantile: the `⌈qn⌉`-th smallest value.
pub fn quantile_nearest_rank(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(AgdError::EmptyInput("quantile values"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(AgdError::invalid("q", format!("{q} is outside (0, 1)")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // Guard against q·n landing a rounding error above an integer.
    let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(n) - 1])
}

/// Lower median (nearest rank at 1/2).
pub fn median(values: &[f64]) -> Result<f64> {
    quantile_nearest_rank(values, 0.5)
}

/// Largest failure count consistent with failure probability `delta` over
/// `runs` trials: the 97.5% quantile of `Binomial(runs, delta)`.
pub fn binomial_failure_allowance(runs: usize, delta: f64) -> Result<usize> {
    let dist = Binomial::new(delta, runs as u64).map_err(|e| AgdError::invalid("delta", e.to_string()))?;
    Ok((0..=runs).find(|&k| dist.cdf(k as u64) >= 0.975).unwrap_or(runs))
}

/// Outcome of a seed sweep against a high-probability bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSweep {
    pub runs: usize,
    pub failures: usize,
    pub allowed_failures: usize,
    pub fraction_within: f64,
    pub passed: bool,
}

pub fn bound_sweep(within: &[bool], delta: f64) -> Result<BoundSweep> {
    if within.is_empty() {
        return Err(AgdError::EmptyInput("seed sweep"));
    }
    let runs = within.len();
    let failures = within.iter().filter(|ok| !**ok).count();
    let allowed = binomial_failure_allowance(runs, delta)?;
    Ok(BoundSweep {
        runs,
        failures,
        allowed_failures: allowed,
        fraction_within: (runs - failures) as f64 / runs as f64,
        passed: failures <= allowed,
    })
}

fn check_nonnegative(a: &[f64]) -> Result<()> {
    match a.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        Some(index) => Err(AgdError::NegativeEntry { index, value: a[index] }),
        None => Ok(()),
    }
}

fn slack(scale: f64) -> f64 {
    1e-12 * scale.abs().max(1.0)
}

/// `√(Σa) ≤ Σ aᵢ/√(Σ_{j≤i} aⱼ) ≤ 2√(Σa)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumSquare {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// Zero prefixes contribute `0/0 := 0`.
pub fn lemma_sum_square(a: &[f64]) -> Result<SumSquare> {
    check_nonnegative(a)?;
    let (mut prefix, mut mid) = (0.0, 0.0);
    for &v in a {
        prefix += v;
        if prefix > 0.0 {
            mid += v / prefix.sqrt();
        }
    }
    let lhs = prefix.sqrt();
    let rhs = 2.0 * lhs;
    let passed = lhs <= mid + slack(mid) && mid <= rhs + slack(rhs);
    Ok(SumSquare { lhs, mid, rhs, passed })
}

/// `Σ aᵢ/(1 + Σ_{j≤i} aⱼ) ≤ log(1 + Σa)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumLog {
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

pub fn lemma_sum_log(a: &[f64]) -> Result<SumLog> {
    check_nonnegative(a)?;
    let (mut prefix, mut lhs) = (0.0, 0.0);
    for &v in a {
        prefix += v;
        lhs += v / (1.0 + prefix);
    }
    let rhs = prefix.ln_1p();
    Ok(SumLog {
        lhs,
        rhs,
        passed: lhs <= rhs + slack(rhs),
    })
}

/// `√(Σa) ≤ Σ √aᵢ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtSum {
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

pub fn lemma_sqrt_sum(a: &[f64]) -> Result<SqrtSum> {
    check_nonnegative(a)?;
    let lhs = a.iter().sum::<f64>().sqrt();
    let rhs = a.iter().map(|v| v.sqrt()).sum::<f64>();
    Ok(SqrtSum {
        lhs,
        rhs,
        passed: lhs <= rhs + slack(rhs),
    })
}
