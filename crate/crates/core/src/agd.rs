//! The generic three-sequence template and its named specializations.

use serde::{Deserialize, Serialize};

use crate::analysis::{IterRecord, Snapshot, Trajectory};
use crate::config::RunConfig;
use crate::error::{ensure_positive, AgdError, Result};
use crate::noise::{GradientOracle, StochasticOracle};
use crate::schedules::{AdaGradAccumulator, StepSchedule};
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    /// `γ = θ = η`; the averaging is inert so `x̄_t = x_t`.
    Sgd,
    /// `α = 2/(t+1)`, `θ = η`, `γ = (1+α)η`.
    RsagConst,
    /// `α = 2/(t+1)`, `θ = η`, `γ = αθ`.
    Nesterov,
    /// `α = 2/(t+1)`, `θ = η_t`, `γ = (1+α)η_t`.
    RsagAdaptive,
    /// `θ = γ = η_t`.
    AdagradNorm,
    /// `α = 2/(t+1)`, `θ = αη_t`, `γ = 0`.
    AdagradNormAvg2,
    /// `α = 1/t`, `θ = αη_t`, `γ = 0`.
    AdagradNormAvg1,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 7] = [
        PolicyKind::Sgd,
        PolicyKind::RsagConst,
        PolicyKind::Nesterov,
        PolicyKind::RsagAdaptive,
        PolicyKind::AdagradNorm,
        PolicyKind::AdagradNormAvg2,
        PolicyKind::AdagradNormAvg1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Sgd => "sgd",
            PolicyKind::RsagConst => "rsag_const",
            PolicyKind::Nesterov => "nesterov",
            PolicyKind::RsagAdaptive => "rsag_adaptive",
            PolicyKind::AdagradNorm => "adagrad_norm",
            PolicyKind::AdagradNormAvg2 => "adagrad_norm_avg_2",
            PolicyKind::AdagradNormAvg1 => "adagrad_norm_avg_1",
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(
            self,
            PolicyKind::RsagAdaptive | PolicyKind::AdagradNorm | PolicyKind::AdagradNormAvg2 | PolicyKind::AdagradNormAvg1
        )
    }

    /// Averaging weight `α_t`.
    pub fn alpha(&self, t: usize) -> f64 {
        match self {
            PolicyKind::AdagradNormAvg1 => 1.0 / t as f64,
            _ => 2.0 / (t as f64 + 1.0),
        }
    }
}

/// A named specialization with its base step `η` (and `G0` when adaptive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgdPolicy {
    pub kind: PolicyKind,
    pub eta: f64,
    pub g0: f64,
}

impl AgdPolicy {
    pub fn new(kind: PolicyKind, eta: f64, g0: f64) -> Result<Self> {
        ensure_positive("eta", eta)?;
        if kind.is_adaptive() {
            ensure_positive("G0", g0)?;
        }
        Ok(AgdPolicy { kind, eta, g0 })
    }

    /// Constant-step policy; `G0` is unused.
    pub fn constant(kind: PolicyKind, eta: f64) -> Result<Self> {
        if kind.is_adaptive() {
            return Err(AgdError::invalid("kind", format!("{} is adaptive and needs G0", kind.name())));
        }
        AgdPolicy::new(kind, eta, 1.0)
    }

    pub fn schedule(&self) -> Result<StepSchedule> {
        Ok(if self.kind.is_adaptive() {
            StepSchedule::AdaGrad(AdaGradAccumulator::new(self.eta, self.g0)?)
        } else {
            StepSchedule::Constant(self.eta)
        })
    }
}

/// `(α_t, θ_t, γ_t)` of one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub alpha: f64,
    pub theta: f64,
    pub gamma: f64,
}

impl Coefficients {
    /// `(γ − θ)/α ≤ θ`, the step-size constraint every shipped kind meets.
    /// Checked as `γ − θ ≤ αθ` with rounding slack, since RSAG sits on the
    /// boundary.
    pub fn is_feasible(&self) -> bool {
        self.alpha > 0.0 && self.gamma - self.theta <= self.alpha * self.theta + 1e-12 * self.gamma.max(self.theta)
    }
}

/// Coefficients of `policy` at iteration `t`. Adaptive kinds read `η_t`
/// from the accumulator, which must already have absorbed `‖g_t‖²`.
pub fn policy_coefficients(policy: &AgdPolicy, t: usize, acc: Option<&AdaGradAccumulator>) -> Result<Coefficients> {
    if t == 0 {
        return Err(AgdError::invalid("t", "iterations are numbered from 1"));
    }
    let alpha = policy.kind.alpha(t);
    let step = if policy.kind.is_adaptive() {
        acc.ok_or(AgdError::MissingAccumulator(policy.kind.name()))?.current_step()
    } else {
        policy.eta
    };
    let (theta, gamma) = match policy.kind {
        PolicyKind::Sgd | PolicyKind::AdagradNorm => (step, step),
        PolicyKind::RsagConst | PolicyKind::RsagAdaptive => (step, (1.0 + alpha) * step),
        PolicyKind::Nesterov => (step, alpha * step),
        PolicyKind::AdagradNormAvg2 | PolicyKind::AdagradNormAvg1 => (alpha * step, 0.0),
    };
    Ok(Coefficients { alpha, theta, gamma })
}

/// `(x_t, x̃_t)` at iteration `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateState {
    pub x: Vector,
    pub x_tilde: Vector,
    pub t: usize,
}

impl IterateState {
    pub fn start(x1: Vector) -> Self {
        IterateState {
            x_tilde: x1.clone(),
            x: x1,
            t: 1,
        }
    }
}

/// Everything one iteration produced.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub xbar: Vector,
    pub g: Vector,
    pub coefficients: Coefficients,
    pub record: IterRecord,
}

/// Runs one iteration of the template with coefficients supplied by
/// `coeffs(t, ‖g_t‖²)`, which returns `(θ_t, γ_t, η_t, G_{t−1}², G_t²)`.
pub fn step_with<F>(state: &IterateState, alpha: f64, oracle: &mut StochasticOracle, mut coeffs: F) -> Result<(IterateState, StepOutput)>
where
    F: FnMut(f64) -> Result<(f64, f64, f64, f64, f64)>,
{
    if !state.x.is_finite() || !state.x_tilde.is_finite() {
        return Err(AgdError::NonFinite("iterate"));
    }
    // x̃ + α(x − x̃) equals αx + (1−α)x̃ but stays exact when x = x̃.
    let mut xbar = state.x_tilde.clone();
    xbar.axpy(alpha, &(&state.x - &state.x_tilde));
    let sample = oracle.sample_full(&xbar)?;
    let g = sample.g;
    let g_sq = g.norm_sq();
    let (theta, gamma, eta_t, g_sq_prev, g_sq_acc) = coeffs(g_sq)?;

    let mut x = state.x.clone();
    x.axpy(-theta, &g);
    let mut x_tilde = xbar.clone();
    x_tilde.axpy(-gamma, &g);
    if !x.is_finite() || !x_tilde.is_finite() {
        return Err(AgdError::NonFinite("iterate"));
    }

    let p = oracle.problem();
    let record = IterRecord {
        t: state.t,
        f_xbar: sample.value,
        grad_sq: sample.grad.norm_sq(),
        delta_bar: (sample.value - p.f_star()).max(0.0),
        g_sq,
        theta,
        gamma,
        alpha,
        eta_t,
        g_sq_prev,
        g_sq_acc,
        gap_norm: xbar.distance(&state.x),
        step_norm: theta * g_sq.sqrt(),
    };
    let next = IterateState {
        x,
        x_tilde,
        t: state.t + 1,
    };
    Ok((
        next,
        StepOutput {
            xbar,
            g,
            coefficients: Coefficients { alpha, theta, gamma },
            record,
        },
    ))
}

/// One iteration of `policy`; `schedule` carries the AdaGrad state.
pub fn step(
    state: &IterateState,
    policy: &AgdPolicy,
    oracle: &mut StochasticOracle,
    schedule: &mut StepSchedule,
) -> Result<(IterateState, StepOutput)> {
    let t = state.t;
    let alpha = policy.kind.alpha(t);
    step_with(state, alpha, oracle, |g_sq| {
        let (eta_t, before, after) = schedule.advance(g_sq)?;
        let c = policy_coefficients(policy, t, schedule.accumulator())?;
        Ok((c.theta, c.gamma, eta_t, before, after))
    })
}

/// How to start and what to keep beyond the per-iteration scalars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub start: Vector,
    /// Store `(x_t, x̃_t)` every `stride` iterations (and at the end).
    pub snapshot_stride: Option<usize>,
}

impl RunOptions {
    pub fn from_start(start: Vector) -> Self {
        RunOptions {
            start,
            snapshot_stride: None,
        }
    }
}

/// Deterministic default start: the all-ones vector scaled by `scale`.
pub fn default_start(dim: usize, scale: f64) -> Vector {
    Vector::filled(dim, scale)
}

/// Executes `cfg.horizon` iterations from `opts.start`.
///
/// On a non-finite value the error carries every record produced so far.
pub fn run(oracle: &mut StochasticOracle, policy: &AgdPolicy, cfg: &RunConfig, opts: &RunOptions) -> Result<Trajectory> {
    cfg.validate()?;
    opts.start.ensure_dim(oracle.problem().dim())?;
    opts.start.ensure_finite("start point")?;
    let mut schedule = policy.schedule()?;
    let mut state = IterateState::start(opts.start.clone());
    let mut traj = Trajectory::new(oracle.problem().name(), opts.start.dim(), cfg.horizon);

    for t in 1..=cfg.horizon {
        match step(&state, policy, oracle, &mut schedule) {
            Ok((next, out)) => {
                traj.push(out.record, &out.xbar);
                state = next;
                let snap = opts.snapshot_stride.map_or(false, |s| s > 0 && t % s == 0);
                if snap || t == cfg.horizon {
                    traj.snapshots.push(Snapshot {
                        t: state.t,
                        x: state.x.clone(),
                        x_tilde: state.x_tilde.clone(),
                    });
                }
            }
            Err(AgdError::NonFinite(what)) => {
                return Err(AgdError::Diverged {
                    t,
                    what,
                    partial: Box::new(traj),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

/// One past iteration as needed by [`closed_form_gap`].
#[derive(Clone, Debug)]
pub struct GapTerm {
    pub g: Vector,
    pub theta: f64,
    pub gamma: f64,
    pub alpha: f64,
}

/// `x̄_t − x_t = (1−α_t)Γ_{t−1} Σ_{k<t} (α_k/Γ_k)((θ_k−γ_k)/α_k) g_k`,
/// with `Γ_1 = 1` and `Γ_k = (1−α_k)Γ_{k−1}`.
pub fn closed_form_gap(history: &[GapTerm], alpha_t: f64, dim: usize) -> Vector {
    let mut gamma_cum = Vec::with_capacity(history.len());
    for (i, h) in history.iter().enumerate() {
        let prev = gamma_cum.last().copied();
        gamma_cum.push(match prev {
            None => 1.0,
            Some(p) => (1.0 - h.alpha) * p,
        });
        debug_assert!(i + 1 == gamma_cum.len());
    }
    let mut sum = Vector::zeros(dim);
    for (h, &gk) in history.iter().zip(&gamma_cum) {
        let w = (h.alpha / gk) * ((h.theta - h.gamma) / h.alpha);
        sum.axpy(w, &h.g);
    }
    let last = gamma_cum.last().copied().unwrap_or(1.0);
    sum.scale((1.0 - alpha_t) * last)
}

/// `(α_t, Γ_t)` for one iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingWeights {
    pub alpha: f64,
    pub gamma_cum: f64,
}

/// Weights for `α_t = 2/(t+1)`, `t = 1..=t_max`, by the recursion
/// `Γ_1 = 1`, `Γ_t = (1 − α_t)Γ_{t−1}`.
pub fn gamma_weights(t_max: usize) -> Vec<AveragingWeights> {
    weights_for(t_max, |t| 2.0 / (t as f64 + 1.0))
}

/// Same recursion for an arbitrary `α_t`.
pub fn weights_for(t_max: usize, alpha: impl Fn(usize) -> f64) -> Vec<AveragingWeights> {
    let mut out: Vec<AveragingWeights> = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let a = alpha(t);
        let gamma_cum = match out.last() {
            None => 1.0,
            Some(prev) => (1.0 - a) * prev.gamma_cum,
        };
        out.push(AveragingWeights { alpha: a, gamma_cum });
    }
    out
}
