//! Test objectives with analytic gradients, known optimum and smoothness
//! certificates, plus the numeric checks that certify them.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, AgdError, Result};
use crate::rng::RandomStream;
use crate::vector::Vector;

/// Smoothness class of an objective.
///
/// `Generalized` means `‖∇f(x) − ∇f(y)‖ ≤ (L0 + L1‖∇f(x)‖)‖x − y‖` whenever
/// `‖x − y‖ ≤ 1/L1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothnessSpec {
    LSmooth { l: f64 },
    Generalized { l0: f64, l1: f64 },
}

impl SmoothnessSpec {
    pub fn generalized(l0: f64, l1: f64) -> Result<Self> {
        ensure_positive("L0", l0)?;
        ensure_positive("L1", l1)?;
        Ok(SmoothnessSpec::Generalized { l0, l1 })
    }

    pub fn l_smooth(l: f64) -> Result<Self> {
        ensure_positive("L", l)?;
        Ok(SmoothnessSpec::LSmooth { l })
    }

    /// `(L0, L1)` of a generalized spec.
    pub fn generalized_pair(&self) -> Result<(f64, f64)> {
        match *self {
            SmoothnessSpec::Generalized { l0, l1 } => Ok((l0, l1)),
            SmoothnessSpec::LSmooth { .. } => Err(AgdError::KindMismatch(
                "expected a generalized (L0, L1) smoothness spec".into(),
            )),
        }
    }

    /// `L` of an L-smooth spec.
    pub fn lipschitz(&self) -> Result<f64> {
        match *self {
            SmoothnessSpec::LSmooth { l } => Ok(l),
            SmoothnessSpec::Generalized { .. } => Err(AgdError::KindMismatch(
                "expected an L-smooth spec".into(),
            )),
        }
    }

    /// Local modulus `L0 + L1‖∇f(x)‖` (or `L`) and the admissible pair radius.
    fn local_modulus(&self, grad_norm: f64) -> (f64, f64) {
        match *self {
            SmoothnessSpec::LSmooth { l } => (l, f64::INFINITY),
            SmoothnessSpec::Generalized { l0, l1 } => (l0 + l1 * grad_norm, 1.0 / l1),
        }
    }
}

/// A deterministic objective with an analytic gradient.
pub trait Objective: Send + Sync + fmt::Debug {
    fn value(&self, x: &Vector) -> f64;
    fn gradient(&self, x: &Vector) -> Vector;
}

#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    objective: Arc<dyn Objective>,
    f_star: f64,
    x_star: Option<Vector>,
    smoothness: SmoothnessSpec,
    convex: bool,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("f_star", &self.f_star)
            .field("smoothness", &self.smoothness)
            .field("convex", &self.convex)
            .finish()
    }
}

impl Problem {
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        objective: Arc<dyn Objective>,
        f_star: f64,
        x_star: Option<Vector>,
        smoothness: SmoothnessSpec,
        convex: bool,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(AgdError::invalid("dim", "must be at least 1"));
        }
        if let Some(x) = &x_star {
            x.ensure_dim(dim)?;
        }
        Ok(Problem {
            name: name.into(),
            dim,
            objective,
            f_star,
            x_star,
            smoothness,
            convex,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&Vector> {
        self.x_star.as_ref()
    }

    pub fn smoothness(&self) -> SmoothnessSpec {
        self.smoothness
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// The same objective under a different smoothness label.
    pub fn with_smoothness(mut self, smoothness: SmoothnessSpec) -> Self {
        self.smoothness = smoothness;
        self
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.objective.value(x)
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.objective.gradient(x)
    }

    /// `f(x) − f*`, clamped at zero against round-off.
    pub fn gap(&self, x: &Vector) -> f64 {
        (self.value(x) - self.f_star).max(0.0)
    }

    /// Largest relative error between the analytic gradient and central
    /// differences with step `h = 1e-6·(1 + ‖x‖)`, over `points` uniform
    /// samples in `[−radius, radius]^d`. Errors are relative to `max(‖∇f‖, 1)`.
    pub fn gradient_check(&self, points: usize, radius: f64, stream: &mut RandomStream) -> f64 {
        let origin = Vector::zeros(self.dim);
        let mut worst = 0.0f64;
        for _ in 0..points {
            let x = stream.uniform_box(&origin, radius);
            let g = self.gradient(&x);
            let h = 1e-6 * (1.0 + x.norm());
            let mut fd = Vec::with_capacity(self.dim);
            for i in 0..self.dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp.as_mut_slice()[i] += h;
                xm.as_mut_slice()[i] -= h;
                fd.push((self.value(&xp) - self.value(&xm)) / (2.0 * h));
            }
            let err = g.distance(&Vector::new(fd)) / g.norm().max(1.0);
            worst = worst.max(err);
        }
        worst
    }
}

#[derive(Debug)]
struct Quadratic {
    curvature: f64,
}

impl Objective for Quadratic {
    fn value(&self, x: &Vector) -> f64 {
        0.5 * self.curvature * x.norm_sq()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        x.scale(self.curvature)
    }
}

#[derive(Debug)]
struct ExpSymmetric;

impl Objective for ExpSymmetric {
    fn value(&self, x: &Vector) -> f64 {
        // e^x + e^{-x} - 2 = 2(cosh x - 1) = 4 sinh²(x/2), stable near 0.
        x.iter().map(|&v| 4.0 * (0.5 * v).sinh().powi(2)).sum()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        x.map(|v| 2.0 * v.sinh())
    }
}

#[derive(Debug)]
struct Quartic;

impl Objective for Quartic {
    fn value(&self, x: &Vector) -> f64 {
        x.iter().map(|&v| v.powi(4)).sum()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        x.map(|v| 4.0 * v.powi(3))
    }
}

/// Extended Rosenbrock: independent 2-D blocks `100(x₂ − x₁²)² + (1 − x₁)²`.
#[derive(Debug)]
struct Rosenbrock;

impl Objective for Rosenbrock {
    fn value(&self, x: &Vector) -> f64 {
        x.as_slice()
            .chunks_exact(2)
            .map(|p| 100.0 * (p[1] - p[0] * p[0]).powi(2) + (1.0 - p[0]).powi(2))
            .sum()
    }
    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = Vec::with_capacity(x.dim());
        for p in x.as_slice().chunks_exact(2) {
            let r = p[1] - p[0] * p[0];
            g.push(-400.0 * p[0] * r - 2.0 * (1.0 - p[0]));
            g.push(200.0 * r);
        }
        Vector::new(g)
    }
}

/// `(curvature/2)‖x‖²`: L-smooth with `L = curvature`, convex, minimized at 0.
pub fn quadratic(dim: usize, curvature: f64) -> Result<Problem> {
    ensure_positive("curvature", curvature)?;
    Problem::custom(
        "quadratic",
        dim,
        Arc::new(Quadratic { curvature }),
        0.0,
        Some(Vector::zeros(dim)),
        SmoothnessSpec::LSmooth { l: curvature },
        true,
    )
}

/// `Σ (e^{xᵢ} + e^{−xᵢ} − 2)`, convex and minimized at 0.
///
/// The Hessian satisfies `f'' ≤ 2 + |f'|` pointwise, but the pairwise form of
/// the definition (which compares gradients at two points up to `1/L1`
/// apart) needs slightly larger constants; `(2.5, 1.5)` is certified.
pub fn exp_symmetric(dim: usize) -> Result<Problem> {
    Problem::custom(
        "exp_symmetric",
        dim,
        Arc::new(ExpSymmetric),
        0.0,
        Some(Vector::zeros(dim)),
        SmoothnessSpec::Generalized { l0: 2.5, l1: 1.5 },
        true,
    )
}

/// `Σ xᵢ⁴`, convex, minimized at 0, `(L0, L1) = (12, 3)`.
pub fn quartic(dim: usize) -> Result<Problem> {
    Problem::custom(
        "quartic",
        dim,
        Arc::new(Quartic),
        0.0,
        Some(Vector::zeros(dim)),
        SmoothnessSpec::Generalized { l0: 12.0, l1: 3.0 },
        true,
    )
}

/// Box half-width over which [`rosenbrock`]'s constants are certified.
pub const ROSENBROCK_BOX: f64 = 2.0;

/// Extended Rosenbrock in even dimension, minimized at `(1, …, 1)`.
///
/// Polynomial Hessians are unbounded, so `(L0, L1) = (6000, 1)` is certified
/// only over `[−2, 2]^d`, which contains every trajectory we run on it.
pub fn rosenbrock(dim: usize) -> Result<Problem> {
    if dim == 0 || dim % 2 != 0 {
        return Err(AgdError::invalid("dim", format!("must be even and positive, got {dim}")));
    }
    Problem::custom(
        "rosenbrock",
        dim,
        Arc::new(Rosenbrock),
        0.0,
        Some(Vector::filled(dim, 1.0)),
        SmoothnessSpec::Generalized { l0: 6000.0, l1: 1.0 },
        false,
    )
}

/// Builds a shipped problem by name.
pub fn by_name(name: &str, dim: usize, curvature: Option<f64>) -> Result<Problem> {
    match name {
        "quadratic" => quadratic(dim, curvature.unwrap_or(1.0)),
        "exp_symmetric" => exp_symmetric(dim),
        "quartic" => quartic(dim),
        "rosenbrock" => rosenbrock(dim),
        other => Err(AgdError::invalid("problem", format!("unknown problem `{other}`"))),
    }
}

/// Result of a sampled smoothness certification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessCertificate {
    pub max_ratio: f64,
    pub pairs: usize,
}

impl SmoothnessCertificate {
    pub fn passed(&self) -> bool {
        self.max_ratio <= 1.0 + 1e-9
    }
}

fn clamp_to_box(x: &Vector, radius: f64) -> Vector {
    x.map(|v| v.clamp(-radius, radius))
}

/// Samples a pair `(x, y)` in `[−radius, radius]^d` with `0 < ‖x − y‖ ≤ reach`.
fn sample_pair(dim: usize, radius: f64, reach: f64, stream: &mut RandomStream) -> (Vector, Vector) {
    let origin = Vector::zeros(dim);
    loop {
        let x = stream.uniform_box(&origin, radius);
        let dir = stream.unit_sphere(dim);
        let r = reach.min(2.0 * radius) * stream.uniform();
        let mut y = x.clone();
        y.axpy(r, &dir);
        let y = clamp_to_box(&y, radius);
        if x.distance(&y) > 0.0 {
            return (x, y);
        }
    }
}

/// Max over sampled pairs of `‖∇f(x) − ∇f(y)‖ / ((L0 + L1‖∇f(x)‖)‖x − y‖)`
/// for pairs inside `[−radius, radius]^d` with `‖x − y‖ ≤ 1/L1`.
pub fn certify_generalized_smooth(
    p: &Problem,
    box_radius: f64,
    pairs: usize,
    stream: &mut RandomStream,
) -> Result<SmoothnessCertificate> {
    let (l0, l1) = p.smoothness().generalized_pair()?;
    ensure_positive("box_radius", box_radius)?;
    let mut max_ratio = 0.0f64;
    for _ in 0..pairs {
        let (x, y) = sample_pair(p.dim(), box_radius, 1.0 / l1, stream);
        let gx = p.gradient(&x);
        let diff = gx.distance(&p.gradient(&y));
        let ratio = diff / ((l0 + l1 * gx.norm()) * x.distance(&y));
        max_ratio = max_ratio.max(ratio);
    }
    Ok(SmoothnessCertificate { max_ratio, pairs })
}

/// Max over sampled points of `‖∇f‖² / (4L0Δ + 4L1²Δ²)` (generalized) or
/// `‖∇f‖² / (2LΔ)` (L-smooth), with `Δ = f(x) − f*` and `0/0 := 0`.
pub fn check_grad_gap(p: &Problem, points: usize, box_radius: f64, stream: &mut RandomStream) -> f64 {
    let center = p.x_star().cloned().unwrap_or_else(|| Vector::zeros(p.dim()));
    let mut worst = 0.0f64;
    for i in 0..points {
        // Include the minimizer itself once to exercise the 0/0 convention.
        let x = if i == 0 { center.clone() } else { stream.uniform_box(&center, box_radius) };
        worst = worst.max(grad_gap_ratio(p, &x));
    }
    worst
}

pub fn grad_gap_ratio(p: &Problem, x: &Vector) -> f64 {
    let gap = p.gap(x);
    let g_sq = p.gradient(x).norm_sq();
    let bound = match p.smoothness() {
        SmoothnessSpec::LSmooth { l } => 2.0 * l * gap,
        SmoothnessSpec::Generalized { l0, l1 } => 4.0 * l0 * gap + 4.0 * l1 * l1 * gap * gap,
    };
    if g_sq == 0.0 {
        0.0
    } else {
        g_sq / bound
    }
}

/// Outcome of the descent-lemma sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    /// Max of `|f(y) − f(x) − ⟨∇f(x), y − x⟩| − (M/2)‖x − y‖²`.
    pub max_violation: f64,
    /// Max of `|lhs − rhs|` relative to the largest term entering `lhs`;
    /// rounding-level for exact quadratics.
    pub max_rel_residual: f64,
    pub pairs: usize,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.max_violation <= 1e-9
    }
}

/// Checks `|f(y) − f(x) − ⟨∇f(x), y−x⟩| ≤ (M(x)/2)‖x − y‖²` where
/// `M(x) = L0 + L1‖∇f(x)‖` (or `L`), over pairs with `‖x − y‖ ≤ 1/L1`.
pub fn lemma_descent(p: &Problem, pairs: usize, box_radius: f64, stream: &mut RandomStream) -> DescentReport {
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_rel_residual = 0.0f64;
    for i in 0..pairs {
        let (x, y) = if i == 0 {
            let x = stream.uniform_box(&Vector::zeros(p.dim()), box_radius);
            (x.clone(), x)
        } else {
            let reach = match p.smoothness() {
                SmoothnessSpec::LSmooth { .. } => box_radius,
                SmoothnessSpec::Generalized { l1, .. } => 1.0 / l1,
            };
            sample_pair(p.dim(), box_radius, reach, stream)
        };
        let gx = p.gradient(&x);
        let (m, _) = p.smoothness().local_modulus(gx.norm());
        let d = &y - &x;
        let (fy, fx, lin) = (p.value(&y), p.value(&x), gx.dot(&d));
        let lhs = (fy - fx - lin).abs();
        let rhs = 0.5 * m * d.norm_sq();
        max_violation = max_violation.max(lhs - rhs);
        let scale = fy.abs().max(fx.abs()).max(lin.abs()).max(rhs);
        if scale > 0.0 {
            max_rel_residual = max_rel_residual.max((lhs - rhs).abs() / scale);
        }
    }
    DescentReport {
        max_violation,
        max_rel_residual,
        pairs,
    }
}

/// Max violation of `⟨∇f(x), x − x*⟩ ≥ f(x) − f* ≥ 0` over sampled points.
/// Non-positive means the check passed.
pub fn check_convexity(p: &Problem, points: usize, box_radius: f64, stream: &mut RandomStream) -> Result<f64> {
    if !p.is_convex() {
        return Err(AgdError::KindMismatch(format!("{} is not convex", p.name())));
    }
    let x_star = p
        .x_star()
        .cloned()
        .ok_or_else(|| AgdError::invalid("x_star", "convexity check needs a known minimizer"))?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..points {
        let x = stream.uniform_box(&x_star, box_radius);
        let inner = p.gradient(&x).dot(&(&x - &x_star));
        let gap = p.value(&x) - p.f_star();
        worst = worst.max((gap - inner).max(-gap));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stream(label: &str) -> RandomStream {
        RandomStream::new(42, label)
    }

    #[test]
    fn quadratic_values() {
        let p = quadratic(1, 1.0).unwrap();
        let x = Vector::new(vec![2.0]);
        assert_eq!(p.value(&x), 2.0);
        assert_eq!(p.gradient(&x)[0], 2.0);
        let z = Vector::zeros(4);
        let p4 = quadratic(4, 3.0).unwrap();
        assert_eq!(p4.value(&z), 0.0);
        assert_eq!(p4.gradient(&z).norm(), 0.0);
        assert!(quadratic(1, 0.0).is_err());
        assert!(quadratic(1, -1.0).is_err());
    }

    #[test]
    fn exp_symmetric_values() {
        let p = exp_symmetric(1).unwrap();
        assert_eq!(p.value(&Vector::zeros(1)), 0.0);
        let x = Vector::new(vec![1.0]);
        let e = std::f64::consts::E;
        assert_relative_eq!(p.value(&x), e + 1.0 / e - 2.0, max_relative = 1e-14);
        assert_relative_eq!(p.gradient(&x)[0], e - 1.0 / e, max_relative = 1e-14);
        assert_relative_eq!(p.value(&x), 1.0862, epsilon = 1e-4);
    }

    #[test]
    fn quartic_values() {
        let p = quartic(1).unwrap();
        let x = Vector::new(vec![2.0]);
        assert_eq!(p.value(&x), 16.0);
        assert_eq!(p.gradient(&x)[0], 32.0);
    }

    #[test]
    fn rosenbrock_values() {
        let p = rosenbrock(4).unwrap();
        let ones = Vector::filled(4, 1.0);
        assert_eq!(p.value(&ones), 0.0);
        assert_eq!(p.gradient(&ones).norm(), 0.0);
        let p2 = rosenbrock(2).unwrap();
        let z = Vector::zeros(2);
        assert_eq!(p2.value(&z), 1.0);
        assert_eq!(p2.gradient(&z).as_slice(), &[-2.0, 0.0]);
        assert!(rosenbrock(3).is_err());
        assert!(rosenbrock(0).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cases = [
            (quadratic(3, 2.0).unwrap(), 5.0),
            (exp_symmetric(4).unwrap(), 5.0),
            (quartic(3).unwrap(), 5.0),
            (rosenbrock(2).unwrap(), ROSENBROCK_BOX),
            (rosenbrock(6).unwrap(), ROSENBROCK_BOX),
        ];
        for (p, r) in cases {
            let err = p.gradient_check(100, r, &mut stream(p.name()));
            assert!(err <= 1e-6, "{}: {err}", p.name());
        }
    }

    #[test]
    fn exp_symmetric_pointwise_hessian_bound() {
        // (f'')² = (f')² + 4 for the 1-D profile, hence f'' ≤ 2 + |f'|.
        let mut s = stream("hess");
        for _ in 0..10_000 {
            let x = s.uniform_in(-10.0, 10.0);
            let h = x.exp() + (-x).exp();
            let g = (x.exp() - (-x).exp()).abs();
            assert!(h <= 2.0 + g + 1e-12 * h);
            assert_relative_eq!(h * h, g * g + 4.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn quartic_pointwise_hessian_bound() {
        let mut s = stream("quartic-hess");
        for _ in 0..10_000 {
            let x = s.uniform_in(-50.0, 50.0);
            assert!(12.0 * x * x <= 12.0 + 3.0 * (4.0 * x.powi(3)).abs());
        }
    }

    #[test]
    fn shipped_certificates_pass() {
        let cases = [
            (exp_symmetric(1).unwrap(), 10.0),
            (exp_symmetric(5).unwrap(), 6.0),
            (quartic(1).unwrap(), 50.0),
            (quartic(3).unwrap(), 10.0),
            (rosenbrock(2).unwrap(), ROSENBROCK_BOX),
            (rosenbrock(4).unwrap(), ROSENBROCK_BOX),
        ];
        for (p, r) in cases {
            let cert = certify_generalized_smooth(&p, r, 10_000, &mut stream(p.name())).unwrap();
            assert!(cert.passed(), "{}: {:?}", p.name(), cert);
        }
    }

    #[test]
    fn relabeled_quadratic_certifies() {
        for l1 in [1e-3, 0.5, 2.0] {
            let p = quadratic(1, 1.0)
                .unwrap()
                .with_smoothness(SmoothnessSpec::generalized(1.0, l1).unwrap());
            let cert = certify_generalized_smooth(&p, 5.0, 2_000, &mut stream("relabel")).unwrap();
            assert!(cert.max_ratio <= 1.0 + 1e-12, "{cert:?}");
        }
    }

    #[test]
    fn undersized_constants_fail_certification() {
        let p = quartic(1)
            .unwrap()
            .with_smoothness(SmoothnessSpec::generalized(1.0, 0.1).unwrap());
        let cert = certify_generalized_smooth(&p, 50.0, 10_000, &mut stream("under")).unwrap();
        assert!(!cert.passed());
        assert!(cert.max_ratio > 1.0);
    }

    #[test]
    fn certification_rejects_l_smooth() {
        let p = quadratic(1, 1.0).unwrap();
        assert!(matches!(
            certify_generalized_smooth(&p, 1.0, 10, &mut stream("k")),
            Err(AgdError::KindMismatch(_))
        ));
    }

    #[test]
    fn grad_gap_quadratic_is_tight() {
        let p = quadratic(3, 2.5).unwrap();
        let mut s = stream("gg");
        for _ in 0..100 {
            let x = s.uniform_box(&Vector::zeros(3), 4.0);
            assert_relative_eq!(grad_gap_ratio(&p, &x), 1.0, max_relative = 1e-12);
        }
        assert_eq!(grad_gap_ratio(&p, &Vector::zeros(3)), 0.0);
    }

    #[test]
    fn grad_gap_holds_on_shipped_problems() {
        let cases = [
            (exp_symmetric(1).unwrap(), 5.0),
            (exp_symmetric(10).unwrap(), 3.0),
            (quartic(5).unwrap(), 10.0),
            (rosenbrock(2).unwrap(), 1.0),
        ];
        for (p, r) in cases {
            let worst = check_grad_gap(&p, 10_000, r, &mut stream(p.name()));
            assert!(worst <= 1.0 + 1e-9, "{}: {worst}", p.name());
        }
    }

    #[test]
    fn descent_lemma_quadratic_is_equality() {
        let p = quadratic(4, 1.7).unwrap();
        let rep = lemma_descent(&p, 1_000, 3.0, &mut stream("dq"));
        assert!(rep.passed());
        assert!(rep.max_rel_residual <= 1e-12, "{rep:?}");
    }

    #[test]
    fn descent_lemma_generalized() {
        for (p, r) in [(exp_symmetric(1).unwrap(), 5.0), (quartic(2).unwrap(), 5.0)] {
            let rep = lemma_descent(&p, 10_000, r, &mut stream(p.name()));
            assert!(rep.passed(), "{}: {rep:?}", p.name());
        }
    }

    #[test]
    fn convexity_inequality_holds() {
        for (p, r) in [
            (quadratic(3, 1.0).unwrap(), 5.0),
            (exp_symmetric(3).unwrap(), 5.0),
            (quartic(3).unwrap(), 5.0),
        ] {
            let worst = check_convexity(&p, 1_000, r, &mut stream(p.name())).unwrap();
            assert!(worst <= 1e-12, "{}: {worst}", p.name());
        }
        assert!(check_convexity(&rosenbrock(2).unwrap(), 10, 1.0, &mut stream("r")).is_err());
    }
}
