//! Executable check suite: exact identities, scalar lemmas, problem and
//! noise certifiers. Every check is deterministic for a given seed.

use serde::{Deserialize, Serialize};

use crate::agd::{closed_form_gap, policy_coefficients, step, weights_for, AgdPolicy, AveragingWeights, GapTerm, IterateState, PolicyKind};
use crate::analysis::{lemma_sqrt_sum, lemma_sum_log, lemma_sum_square};
use crate::constants::{eta_hat_bound, eta_tilde_bound};
use crate::error::Result;
use crate::noise::{certify_noise, NoiseMode, NoiseSpec, StochasticOracle};
use crate::problems::{
    certify_generalized_smooth, check_convexity, check_grad_gap, exp_symmetric, lemma_descent, quadratic, quartic,
    rosenbrock, Problem, ROSENBROCK_BOX,
};
use crate::rng::RandomStream;
use crate::schedules::AdaGradAccumulator;
use crate::sweep::{map_seeds, seed_range};
use crate::vector::Vector;

/// Deliberate defects used to confirm the suite catches them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Build `Γ_t` from `α_{t+1}` instead of `α_t`.
    GammaOffByOne,
}

/// One named check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    /// Largest measured excess over the allowed bound (≤ 0 when clean),
    /// or the raw statistic when `limit` is an absolute threshold.
    #[serde(with = "crate::constants::extended_real")]
    pub worst: f64,
    #[serde(with = "crate::constants::extended_real")]
    pub limit: f64,
    pub passed: bool,
}

impl CheckResult {
    fn from_counts(name: impl Into<String>, instances: usize, violations: usize, worst: f64, limit: f64) -> Self {
        CheckResult {
            name: name.into(),
            instances,
            violations,
            worst,
            limit,
            passed: violations == 0 && instances > 0,
        }
    }

    /// Single-statistic check: passes iff `worst ≤ limit`.
    fn threshold(name: impl Into<String>, instances: usize, worst: f64, limit: f64) -> Self {
        let violations = usize::from(!(worst <= limit));
        CheckResult::from_counts(name, instances, violations, worst, limit)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Averaging weights for `α_t = 2/(t+1)`, optionally corrupted.
pub fn averaging_weights(t_max: usize, fault: Option<Fault>) -> Vec<AveragingWeights> {
    match fault {
        None => weights_for(t_max, |t| 2.0 / (t as f64 + 1.0)),
        Some(Fault::GammaOffByOne) => {
            let alpha = |t: usize| 2.0 / (t as f64 + 1.0);
            let mut out: Vec<AveragingWeights> = Vec::with_capacity(t_max);
            for t in 1..=t_max {
                let gamma_cum = match out.last() {
                    None => 1.0,
                    Some(prev) => (1.0 - alpha(t + 1)) * prev.gamma_cum,
                };
                out.push(AveragingWeights { alpha: alpha(t), gamma_cum });
            }
            out
        }
    }
}

/// `Γ_t Σ_{k≤t} α_k/Γ_k = 1` and `Γ_t = 2/(t(t+1))` for `t ≤ t_max`.
pub fn check_averaging_identity(t_max: usize, fault: Option<Fault>) -> CheckResult {
    let w = averaging_weights(t_max, fault);
    let (mut sum, mut worst, mut violations) = (0.0, 0.0f64, 0);
    for (i, a) in w.iter().enumerate() {
        let t = (i + 1) as f64;
        sum += a.alpha / a.gamma_cum;
        let mut err = (a.gamma_cum * sum - 1.0).abs();
        if i >= 1 {
            err = err.max((a.gamma_cum - 2.0 / (t * (t + 1.0))).abs());
        }
        worst = worst.max(err);
        violations += usize::from(err > 1e-12);
    }
    CheckResult::from_counts("averaging_weight_identity", w.len(), violations, worst, 1e-12)
}

/// `[Σ_{k=t}^T (1−α_k)Γ_k]·(α_t/Γ_t) ≤ 2` for all `1 ≤ t ≤ T ≤ t_max`.
pub fn check_averaging_tail(t_max: usize, fault: Option<Fault>) -> CheckResult {
    let w = averaging_weights(t_max, fault);
    // prefix[k] = Σ_{j<k} (1−α_j)Γ_j over 0-based indices.
    let mut prefix = Vec::with_capacity(w.len() + 1);
    prefix.push(0.0);
    for a in &w {
        prefix.push(prefix.last().unwrap() + (1.0 - a.alpha) * a.gamma_cum);
    }
    let (mut worst, mut violations, mut instances) = (f64::NEG_INFINITY, 0, 0);
    for big_t in 1..=w.len() {
        for t in 1..=big_t {
            let tail = prefix[big_t] - prefix[t - 1];
            let v = tail * w[t - 1].alpha / w[t - 1].gamma_cum - 2.0;
            worst = worst.max(v);
            violations += usize::from(v > 1e-12);
            instances += 1;
        }
    }
    CheckResult::from_counts("averaging_tail_bound", instances, violations, worst, 1e-12)
}

fn gap_problem() -> Problem {
    exp_symmetric(5).expect("valid dimension")
}

fn policy_for(kind: PolicyKind) -> AgdPolicy {
    let (eta, g0) = if kind.is_adaptive() { (0.5, 1.0) } else { (0.05, 1.0) };
    AgdPolicy::new(kind, eta, g0).expect("valid policy")
}

/// Max deviation of the simulated `x̄_t − x_t` from the closed form over one
/// noisy run of `horizon` steps.
pub fn gap_oracle_deviation(kind: PolicyKind, seed: u64, horizon: usize) -> Result<f64> {
    let p = gap_problem();
    let spec = NoiseSpec::new(0.0, 0.0, 1.0, NoiseMode::Expected)?;
    let mut oracle = StochasticOracle::new(p.clone(), spec, RandomStream::new(seed, "gap-oracle/noise"))?;
    let policy = policy_for(kind);
    let mut schedule = policy.schedule()?;
    let mut start_rng = RandomStream::new(seed, "gap-oracle/start");
    let mut state = IterateState::start(start_rng.uniform_box(&Vector::zeros(p.dim()), 1.0));
    let mut history = Vec::with_capacity(horizon);
    let mut worst = 0.0f64;
    for _ in 0..horizon {
        let x_t = state.x.clone();
        let (next, out) = step(&state, &policy, &mut oracle, &mut schedule)?;
        let simulated = &out.xbar - &x_t;
        let formula = closed_form_gap(&history, out.coefficients.alpha, p.dim());
        worst = worst.max(simulated.distance(&formula));
        history.push(GapTerm {
            g: out.g,
            theta: out.coefficients.theta,
            gamma: out.coefficients.gamma,
            alpha: out.coefficients.alpha,
        });
        state = next;
    }
    Ok(worst)
}

/// Simulated gap vs the closed form over `runs` seeds per policy kind.
pub fn check_gap_oracle(seed: u64, runs: usize, horizon: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for kind in PolicyKind::ALL {
        let seeds = seed_range(seed.wrapping_mul(1_000_003), runs);
        let devs = map_seeds(&seeds, |s| gap_oracle_deviation(kind, s, horizon));
        let devs = devs.into_iter().collect::<Result<Vec<_>>>()?;
        let worst = devs.iter().cloned().fold(0.0, f64::max);
        let violations = devs.iter().filter(|d| **d > 1e-10).count();
        out.push(CheckResult::from_counts(format!("closed_form_gap/{}", kind.name()), runs, violations, worst, 1e-10));
    }
    // Plain SGD keeps x̄_t = x_t exactly.
    let p = gap_problem();
    let spec = NoiseSpec::new(0.0, 0.0, 1.0, NoiseMode::Expected)?;
    let policy = policy_for(PolicyKind::Sgd);
    let cfg = crate::config::RunConfig::new(horizon, 0.1, seed, p.dim())?;
    let mut nonzero = 0;
    let mut worst = 0.0f64;
    for s in seed_range(seed, runs) {
        let mut oracle = StochasticOracle::new(p.clone(), spec, RandomStream::new(s, "sgd-gap/noise"))?;
        let traj = crate::agd::run(&mut oracle, &policy, &cfg.with_seed(s), &crate::agd::RunOptions::from_start(Vector::filled(p.dim(), 0.5)))?;
        for r in &traj.records {
            worst = worst.max(r.gap_norm);
            nonzero += usize::from(r.gap_norm != 0.0);
        }
    }
    out.push(CheckResult::from_counts("sgd_zero_gap", runs * horizon, nonzero, worst, 0.0));
    Ok(out)
}

/// `(γ_t − θ_t)/α_t ≤ θ_t` and `α_t ∈ (0, 1]` for every kind, `t ≤ t_max`.
pub fn check_feasibility(t_max: usize) -> Result<CheckResult> {
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for kind in PolicyKind::ALL {
        let policy = policy_for(kind);
        let mut acc = AdaGradAccumulator::new(policy.eta, policy.g0)?;
        for t in 1..=t_max {
            acc.absorb(1.0)?;
            let c = policy_coefficients(&policy, t, Some(&acc))?;
            worst = worst.max((c.gamma - c.theta) / c.alpha - c.theta);
            violations += usize::from(!c.is_feasible() || !(c.alpha > 0.0 && c.alpha <= 1.0));
        }
    }
    Ok(CheckResult::from_counts("policy_feasibility", PolicyKind::ALL.len() * t_max, violations, worst, 0.0))
}

fn random_sequence(rng: &mut RandomStream, max_len: usize) -> Vec<f64> {
    let len = 1 + (rng.next_u64() % max_len as u64) as usize;
    (0..len).map(|_| rng.standard_normal().abs()).collect()
}

/// Sum-square, sum-log and sqrt-sum inequalities on random sequences.
pub fn check_scalar_lemmas(seed: u64, instances: usize) -> Result<Vec<CheckResult>> {
    let mut rng = RandomStream::new(seed, "verify/scalar-lemmas");
    let (mut v_sq, mut v_log, mut v_sqrt) = (0, 0, 0);
    let (mut w_sq, mut w_log, mut w_sqrt) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..instances {
        let a = random_sequence(&mut rng, 100);
        let s = lemma_sum_square(&a)?;
        w_sq = w_sq.max((s.lhs - s.mid).max(s.mid - s.rhs));
        v_sq += usize::from(!s.passed);
        let l = lemma_sum_log(&a)?;
        w_log = w_log.max(l.lhs - l.rhs);
        v_log += usize::from(!l.passed);
        let q = lemma_sqrt_sum(&a)?;
        w_sqrt = w_sqrt.max(q.lhs - q.rhs);
        v_sqrt += usize::from(!q.passed);
    }
    Ok(vec![
        CheckResult::from_counts("lemma_sum_square", instances, v_sq, w_sq, 1e-12),
        CheckResult::from_counts("lemma_sum_log", instances, v_log, w_log, 1e-12),
        CheckResult::from_counts("lemma_sqrt_sum", instances, v_sqrt, w_sqrt, 1e-12),
    ])
}

/// The AdaGrad telescoping bound `Σ g_t/G_t² ≤ log(1 + Σ g_t/G_0²)`.
pub fn check_adagrad_telescoping(seed: u64, instances: usize) -> Result<CheckResult> {
    let mut rng = RandomStream::new(seed, "verify/adagrad");
    let (mut violations, mut worst) = (0, f64::NEG_INFINITY);
    for _ in 0..instances {
        let g0 = rng.uniform_in(0.01, 3.0);
        let gs = random_sequence(&mut rng, 100);
        let mut acc = AdaGradAccumulator::new(1.0, g0)?;
        let mut prev = acc.current_step();
        let mut lhs = 0.0;
        let mut monotone = true;
        for &g in &gs {
            let eta_t = acc.absorb(g)?;
            monotone &= eta_t <= prev;
            prev = eta_t;
            lhs += g / acc.g_sq();
        }
        let rhs = (gs.iter().sum::<f64>() / (g0 * g0)).ln_1p();
        worst = worst.max(lhs - rhs);
        violations += usize::from(!monotone || lhs > rhs + 1e-12 * rhs.max(1.0));
    }
    Ok(CheckResult::from_counts("adagrad_telescoping", instances, violations, worst, 1e-12))
}

/// Problems and the boxes their certificates cover.
pub fn certified_problems() -> Result<Vec<(Problem, f64)>> {
    Ok(vec![
        (quadratic(3, 2.0)?, 5.0),
        (exp_symmetric(1)?, 5.0),
        (exp_symmetric(4)?, 5.0),
        (quartic(2)?, 5.0),
        (rosenbrock(2)?, ROSENBROCK_BOX),
        (rosenbrock(4)?, ROSENBROCK_BOX),
    ])
}

/// Gradient, smoothness, descent, grad-gap and convexity checks.
pub fn check_problems(seed: u64, instances: usize) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (p, r) in certified_problems()? {
        let tag = format!("{}{}", p.name(), p.dim());
        let rng = RandomStream::new(seed, &format!("verify/problems/{tag}"));
        let fd = p.gradient_check(100, r, &mut rng.substream("fd"));
        out.push(CheckResult::threshold(format!("gradient_check/{tag}"), 100, fd, 1e-6));
        if let Ok(cert) = certify_generalized_smooth(&p, r, instances, &mut rng.substream("smooth")) {
            out.push(CheckResult::threshold(format!("smoothness_certificate/{tag}"), instances, cert.max_ratio, 1.0 + 1e-9));
        }
        let d = lemma_descent(&p, instances, r, &mut rng.substream("descent"));
        out.push(CheckResult::threshold(format!("lemma_descent/{tag}"), instances, d.max_violation, 1e-9));
        let gg = check_grad_gap(&p, instances, r, &mut rng.substream("grad-gap"));
        out.push(CheckResult::threshold(format!("grad_gap/{tag}"), instances, gg, 1.0 + 1e-9));
        if p.is_convex() {
            let cv = check_convexity(&p, instances, r, &mut rng.substream("convexity"))?;
            out.push(CheckResult::threshold(format!("convexity/{tag}"), instances, cv, 1e-9));
        }
    }
    Ok(out)
}

/// The `η̃_t` and `η̂_t` perturbation bounds on random admissible states.
pub fn check_step_perturbations(seed: u64, instances: usize) -> Result<Vec<CheckResult>> {
    let mut rng = RandomStream::new(seed, "verify/eta-perturbation");
    let (mut v_tilde, mut v_hat) = (0, 0);
    let (mut w_tilde, mut w_hat) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..instances {
        let d = 1 + (rng.next_u64() % 8) as usize;
        let spec = NoiseSpec::new(rng.uniform_in(0.0, 2.0), rng.uniform_in(0.0, 2.0), rng.uniform_in(0.0, 2.0), NoiseMode::AlmostSure)?;
        let eta = rng.uniform_in(0.01, 2.0);
        let g_prev_sq = rng.uniform_in(0.01, 10.0);
        let delta_bar = rng.uniform_in(0.0, 5.0);
        let grad_bar = rng.normal_vector(d).scale(rng.uniform_in(0.0, 3.0));
        // An admissible sample: ‖g − ḡ‖² ≤ AΔ̄ + B‖ḡ‖² + C.
        let bound = spec.bound(delta_bar, grad_bar.norm_sq());
        let xi = rng.unit_sphere(d).scale(bound.sqrt() * rng.uniform());
        let g = &grad_bar + &xi;

        let (lhs, rhs) = eta_tilde_bound(&spec, eta, g_prev_sq, delta_bar, grad_bar.norm_sq(), g.norm_sq());
        w_tilde = w_tilde.max(lhs - rhs);
        v_tilde += usize::from(lhs > rhs + 1e-9);
        let (lhs, rhs) = eta_hat_bound(eta, g_prev_sq, grad_bar.norm_sq(), g.norm_sq(), xi.norm());
        w_hat = w_hat.max(lhs - rhs);
        v_hat += usize::from(lhs > rhs + 1e-9);
    }
    Ok(vec![
        CheckResult::from_counts("eta_tilde_bound", instances, v_tilde, w_tilde, 1e-9),
        CheckResult::from_counts("eta_hat_bound", instances, v_hat, w_hat, 1e-9),
    ])
}

/// Sample sizes for the noise checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    /// Total samples for the almost-sure bound (split over 100 points).
    pub almost_sure_samples: usize,
    /// Samples per point for the second-moment check (20 points).
    pub moment_samples: usize,
    /// Points × samples for unbiasedness per mode.
    pub bias_points: usize,
    pub bias_samples: usize,
}

impl Default for NoiseBudget {
    fn default() -> Self {
        NoiseBudget {
            almost_sure_samples: 1_000_000,
            moment_samples: 50_000,
            bias_points: 20,
            bias_samples: 20_000,
        }
    }
}

/// Almost-sure bound, expected-mode second moment, sub-Gaussian moment and
/// unbiasedness of every noise mode.
pub fn check_noise(seed: u64, budget: NoiseBudget) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let root = RandomStream::new(seed, "verify/noise");

    let p = exp_symmetric(2)?;
    let spec = NoiseSpec::new(1.0, 1.0, 1.0, NoiseMode::AlmostSure)?;
    let mut oracle = StochasticOracle::new(p, spec, root.substream("as/oracle"))?;
    let points = 100;
    let per = (budget.almost_sure_samples / points).max(1);
    let rep = certify_noise(&mut oracle, points, per, &mut root.substream("as/points"))?;
    out.push(CheckResult::threshold("noise_almost_sure_bound", points * per, rep.worst_ratio, 1.0 + 1e-12));

    // Second moment E‖ξ‖² = A·Δ + B‖∇f‖² + C at 20 points, within 1%.
    let p = quadratic(10, 1.0)?;
    let spec = NoiseSpec::new(1.0, 1.0, 1.0, NoiseMode::Expected)?;
    let mut oracle = StochasticOracle::new(p.clone(), spec, root.substream("moment/oracle"))?;
    let mut pts = root.substream("moment/points");
    let (mut worst, mut violations) = (0.0f64, 0);
    for _ in 0..20 {
        let x = pts.uniform_box(&Vector::zeros(p.dim()), 2.0);
        let grad = p.gradient(&x);
        let bound = spec.bound(p.gap(&x), grad.norm_sq());
        let mut m = 0.0;
        for _ in 0..budget.moment_samples {
            let s = oracle.sample_full(&x)?;
            m += (&s.g - &grad).norm_sq();
        }
        let rel = (m / budget.moment_samples as f64 / bound - 1.0).abs();
        worst = worst.max(rel);
        violations += usize::from(rel > 0.01);
    }
    out.push(CheckResult::from_counts("noise_expected_second_moment", 20, violations, worst, 0.01));

    for mode in [NoiseMode::AlmostSure, NoiseMode::Expected, NoiseMode::SubGaussian, NoiseMode::None] {
        let spec = NoiseSpec::new(1.0, 1.0, 1.0, mode)?;
        let p = exp_symmetric(3)?;
        let mut oracle = StochasticOracle::new(p, spec, root.substream(&format!("bias/{}", mode.name())))?;
        let rep = certify_noise(&mut oracle, budget.bias_points, budget.bias_samples, &mut root.substream("bias/points"))?;
        out.push(CheckResult::threshold(
            format!("noise_unbiased/{}", mode.name()),
            budget.bias_points * budget.bias_samples,
            rep.max_abs_z,
            4.0,
        ));
        if mode == NoiseMode::SubGaussian {
            out.push(CheckResult::threshold(
                "noise_sub_gaussian_moment",
                budget.bias_points * budget.bias_samples,
                rep.mean_exp_ratio,
                std::f64::consts::E * 1.05,
            ));
        }
    }
    Ok(out)
}

/// Suite size knobs; `default()` matches the acceptance budgets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub identity_horizon: usize,
    pub gap_runs: usize,
    pub gap_horizon: usize,
    pub lemma_instances: usize,
    pub noise: NoiseBudget,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            fault: None,
            identity_horizon: 10_000,
            gap_runs: 50,
            gap_horizon: 200,
            lemma_instances: 10_000,
            noise: NoiseBudget::default(),
        }
    }
}

pub fn run_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let mut checks = vec![
        check_averaging_identity(opts.identity_horizon, opts.fault),
        check_averaging_tail(opts.identity_horizon, opts.fault),
        check_feasibility(opts.identity_horizon)?,
    ];
    checks.extend(check_gap_oracle(opts.seed, opts.gap_runs, opts.gap_horizon)?);
    checks.extend(check_scalar_lemmas(opts.seed, opts.lemma_instances)?);
    checks.push(check_adagrad_telescoping(opts.seed, opts.lemma_instances)?);
    checks.extend(check_step_perturbations(opts.seed, opts.lemma_instances)?);
    checks.extend(check_problems(opts.seed, opts.lemma_instances)?);
    checks.extend(check_noise(opts.seed, opts.noise)?);
    Ok(VerifyReport {
        seed: opts.seed,
        fault: opts.fault,
        checks,
    })
}
