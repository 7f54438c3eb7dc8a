//! Stochastic gradient oracles under relaxed affine variance,
//! `‖g(x) − ∇f(x)‖² ≤ A(f(x) − f*) + B‖∇f(x)‖² + C`,
//! and a statistical certifier for them.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonnegative, AgdError, Result};
use crate::problems::Problem;
use crate::rng::RandomStream;
use crate::vector::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Every sample satisfies the bound.
    AlmostSure,
    /// `E‖ξ‖²` equals the bound.
    Expected,
    /// `E exp(‖ξ‖²/bound) ≤ e`.
    SubGaussian,
    /// Exact gradients.
    None,
}

impl NoiseMode {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseMode::AlmostSure => "almost_sure",
            NoiseMode::Expected => "expected",
            NoiseMode::SubGaussian => "sub_gaussian",
            NoiseMode::None => "none",
        }
    }
}

/// Sub-Gaussian draws are Gaussian with this fraction of the bound as total
/// variance, radially truncated at [`SUB_GAUSSIAN_TRUNCATION`] × bound.
pub const SUB_GAUSSIAN_VARIANCE_SCALE: f64 = 0.5;
pub const SUB_GAUSSIAN_TRUNCATION: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub mode: NoiseMode,
}

impl NoiseSpec {
    pub fn new(a: f64, b: f64, c: f64, mode: NoiseMode) -> Result<Self> {
        let spec = NoiseSpec { a, b, c, mode };
        spec.validate()?;
        Ok(spec)
    }

    pub fn noiseless() -> Self {
        NoiseSpec {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            mode: NoiseMode::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonnegative("A", self.a)?;
        ensure_nonnegative("B", self.b)?;
        ensure_nonnegative("C", self.c)
    }

    /// `A·Δ + B‖∇f‖² + C`.
    pub fn bound(&self, gap: f64, grad_sq: f64) -> f64 {
        self.a * gap + self.b * grad_sq + self.c
    }

    pub fn is_noiseless(&self) -> bool {
        self.mode == NoiseMode::None || (self.a == 0.0 && self.b == 0.0 && self.c == 0.0)
    }
}

/// Anything that returns stochastic gradients of a known problem.
pub trait GradientOracle {
    fn problem(&self) -> &Problem;
    fn spec(&self) -> NoiseSpec;
    fn sample(&mut self, x: &Vector) -> Result<Vector>;
}

/// A sample together with the exact quantities it was built from.
#[derive(Clone, Debug)]
pub struct OracleSample {
    pub g: Vector,
    pub grad: Vector,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct StochasticOracle {
    problem: Problem,
    spec: NoiseSpec,
    stream: RandomStream,
    queries: u64,
}

impl StochasticOracle {
    pub fn new(problem: Problem, spec: NoiseSpec, stream: RandomStream) -> Result<Self> {
        spec.validate()?;
        Ok(StochasticOracle {
            problem,
            spec,
            stream,
            queries: 0,
        })
    }

    /// Same problem and noise, independent randomness.
    pub fn with_stream(&self, stream: RandomStream) -> Self {
        StochasticOracle {
            problem: self.problem.clone(),
            spec: self.spec,
            stream,
            queries: 0,
        }
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn stream_mut(&mut self) -> &mut RandomStream {
        &mut self.stream
    }

    /// Draws `g(x)` and returns it together with `∇f(x)` and `f(x)`, so the
    /// caller does not re-evaluate the problem.
    pub fn sample_full(&mut self, x: &Vector) -> Result<OracleSample> {
        x.ensure_dim(self.problem.dim())?;
        self.queries += 1;
        let value = self.problem.value(x);
        let grad = self.problem.gradient(x);
        if !value.is_finite() {
            return Err(AgdError::NonFinite("objective value"));
        }
        grad.ensure_finite("gradient")?;
        let noise = self.draw_noise(value, &grad);
        let g = match noise {
            Some(xi) => &grad + &xi,
            None => grad.clone(),
        };
        g.ensure_finite("stochastic gradient")?;
        Ok(OracleSample { g, grad, value })
    }

    fn draw_noise(&mut self, value: f64, grad: &Vector) -> Option<Vector> {
        if self.spec.mode == NoiseMode::None {
            return None;
        }
        let gap = (value - self.problem.f_star()).max(0.0);
        let bound = self.spec.bound(gap, grad.norm_sq());
        if bound == 0.0 {
            return None;
        }
        let d = grad.dim();
        let s = &mut self.stream;
        let xi = match self.spec.mode {
            NoiseMode::AlmostSure => {
                let u = s.unit_sphere(d);
                let r = s.uniform() * bound.sqrt();
                u.scale(r)
            }
            NoiseMode::Expected => s.normal_vector(d).scale((bound / d as f64).sqrt()),
            NoiseMode::SubGaussian => {
                let sigma = (SUB_GAUSSIAN_VARIANCE_SCALE * bound / d as f64).sqrt();
                loop {
                    let xi = s.normal_vector(d).scale(sigma);
                    if xi.norm_sq() <= SUB_GAUSSIAN_TRUNCATION * bound {
                        break xi;
                    }
                }
            }
            NoiseMode::None => unreachable!(),
        };
        Some(xi)
    }
}

impl GradientOracle for StochasticOracle {
    fn problem(&self) -> &Problem {
        &self.problem
    }

    fn spec(&self) -> NoiseSpec {
        self.spec
    }

    fn sample(&mut self, x: &Vector) -> Result<Vector> {
        self.sample_full(x).map(|s| s.g)
    }
}

/// Summary of [`certify_noise`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoiseReport {
    pub mode: NoiseMode,
    pub points_used: usize,
    pub points_skipped: usize,
    pub samples_per_point: usize,
    /// Max over all samples of `‖ξ‖² / bound`.
    pub worst_ratio: f64,
    /// Mean over all samples of `‖ξ‖² / bound`.
    pub mean_ratio: f64,
    /// Mean over all samples of `exp(‖ξ‖² / bound)`.
    pub mean_exp_ratio: f64,
    /// Largest per-component z-score of the sample mean of `ξ`.
    pub max_abs_z: f64,
    /// Truncation and variance scale of the sub-Gaussian construction.
    pub sub_gaussian_variance_scale: f64,
    pub sub_gaussian_truncation: f64,
}

impl NoiseReport {
    pub fn bound_passed(&self) -> bool {
        match self.mode {
            NoiseMode::AlmostSure => self.worst_ratio <= 1.0 + 1e-12,
            NoiseMode::Expected => {
                self.mean_ratio <= 1.0 + 3.0 / (self.samples_per_point as f64).sqrt()
            }
            NoiseMode::SubGaussian => self.mean_exp_ratio <= std::f64::consts::E * 1.05,
            NoiseMode::None => self.worst_ratio == 0.0,
        }
    }

    pub fn unbiased_passed(&self) -> bool {
        self.max_abs_z <= 4.0
    }

    pub fn passed(&self) -> bool {
        self.bound_passed() && self.unbiased_passed()
    }
}

/// z-score of a sample mean; `0/0 := 0`.
pub fn z_score(mean: f64, var: f64, n: usize) -> f64 {
    let se = (var / n as f64).sqrt();
    if se == 0.0 {
        if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        mean.abs() / se
    }
}

/// Samples `points` locations uniformly in `x* + [−2, 2]^d` (origin if `x*`
/// is unknown) and draws `samples_per_point` gradients at each.
///
/// Points whose bound `A·Δ + B‖∇f‖² + C` is zero are skipped, except in
/// noiseless mode where `ξ ≡ 0` and the ratio is defined as zero.
pub fn certify_noise<O: GradientOracle>(
    oracle: &mut O,
    points: usize,
    samples_per_point: usize,
    stream: &mut RandomStream,
) -> Result<NoiseReport> {
    if points == 0 || samples_per_point == 0 {
        return Err(AgdError::EmptyInput("certify_noise needs points and samples"));
    }
    let spec = oracle.spec();
    let p = oracle.problem().clone();
    let center = p.x_star().cloned().unwrap_or_else(|| Vector::zeros(p.dim()));
    let d = p.dim();

    let mut used = 0usize;
    let mut skipped = 0usize;
    let mut worst = 0.0f64;
    let mut ratio_sum = 0.0;
    let mut exp_sum = 0.0;
    let mut max_z = 0.0f64;
    for _ in 0..points {
        let x = stream.uniform_box(&center, 2.0);
        let grad = p.gradient(&x);
        let bound = spec.bound(p.gap(&x), grad.norm_sq());
        let noiseless = spec.mode == NoiseMode::None;
        if bound == 0.0 && !noiseless {
            skipped += 1;
            continue;
        }
        used += 1;
        let mut mean = vec![0.0; d];
        let mut m2 = vec![0.0; d];
        for k in 0..samples_per_point {
            let g = oracle.sample(&x)?;
            let xi = &g - &grad;
            let ratio = if noiseless && bound == 0.0 {
                if xi.norm_sq() == 0.0 { 0.0 } else { f64::INFINITY }
            } else {
                xi.norm_sq() / bound
            };
            worst = worst.max(ratio);
            ratio_sum += ratio;
            exp_sum += ratio.exp();
            // Welford update per component.
            let n = (k + 1) as f64;
            for (j, &v) in xi.iter().enumerate() {
                let delta = v - mean[j];
                mean[j] += delta / n;
                m2[j] += delta * (v - mean[j]);
            }
        }
        for j in 0..d {
            let var = if samples_per_point > 1 { m2[j] / (samples_per_point - 1) as f64 } else { 0.0 };
            max_z = max_z.max(z_score(mean[j], var, samples_per_point));
        }
    }
    if used == 0 {
        return Err(AgdError::DegenerateNoise);
    }
    let total = (used * samples_per_point) as f64;
    Ok(NoiseReport {
        mode: spec.mode,
        points_used: used,
        points_skipped: skipped,
        samples_per_point,
        worst_ratio: worst,
        mean_ratio: ratio_sum / total,
        mean_exp_ratio: exp_sum / total,
        max_abs_z: max_z,
        sub_gaussian_variance_scale: SUB_GAUSSIAN_VARIANCE_SCALE,
        sub_gaussian_truncation: SUB_GAUSSIAN_TRUNCATION,
    })
}
