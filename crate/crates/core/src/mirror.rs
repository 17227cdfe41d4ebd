//! Mirror maps, Bregman divergences and the regularized mirror step.

use serde::{Deserialize, Serialize};

use crate::objectives::{Objective, RegularizedRisk};
use crate::tolerances;
use crate::vecspace::{dot, norm, norm2, project, sub, DomainSpec, NormSpec};
use crate::{Error, Result};

/// Reference functions, each 1-strongly convex w.r.t. [`MirrorKind::norm`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MirrorKind {
    /// `½‖x‖₂²`
    SquaredL2,
    /// `‖x‖_p² / (2(p − 1))`, `1 < p ≤ 2`
    SquaredLp { p: f64 },
    /// `Σ x_i log x_i` on the simplex
    NegativeEntropy,
}

impl MirrorKind {
    pub fn norm(self) -> NormSpec {
        match self {
            MirrorKind::SquaredL2 => NormSpec::L2,
            MirrorKind::SquaredLp { p } => NormSpec::Lp(p),
            MirrorKind::NegativeEntropy => NormSpec::L1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorMap {
    pub kind: MirrorKind,
    pub domain: DomainSpec,
}

impl MirrorMap {
    /// Pairs a reference function with a domain it supports: ℓ2 balls for
    /// `SquaredL2`, ℓp balls with the same `p` for `SquaredLp`, the simplex
    /// for `NegativeEntropy` (the first two also accept `Unconstrained`).
    pub fn new(kind: MirrorKind, domain: DomainSpec) -> Result<Self> {
        domain.validate()?;
        let ok = match (kind, domain) {
            (MirrorKind::SquaredL2, DomainSpec::Unconstrained | DomainSpec::L2Ball { .. }) => true,
            (MirrorKind::SquaredLp { p }, DomainSpec::Unconstrained) => p > 1.0 && p <= 2.0,
            (MirrorKind::SquaredLp { p }, DomainSpec::LpBall { p: q, .. }) => p == q,
            (MirrorKind::NegativeEntropy, DomainSpec::Simplex) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::Config(format!(
                "mirror map {kind:?} is not supported on {domain:?}"
            )));
        }
        Ok(MirrorMap { kind, domain })
    }

    pub fn squared_l2(domain: DomainSpec) -> Result<Self> {
        MirrorMap::new(MirrorKind::SquaredL2, domain)
    }

    pub fn squared_lp(p: f64, radius: f64) -> Result<Self> {
        MirrorMap::new(MirrorKind::SquaredLp { p }, DomainSpec::LpBall { p, radius })
    }

    pub fn entropy() -> Self {
        MirrorMap {
            kind: MirrorKind::NegativeEntropy,
            domain: DomainSpec::Simplex,
        }
    }

    pub fn norm(&self) -> NormSpec {
        self.kind.norm()
    }

    /// `R(x)`; `+∞` outside the entropy's domain.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            MirrorKind::SquaredL2 => 0.5 * dot(x, x),
            MirrorKind::SquaredLp { p } => {
                let n = norm(x, NormSpec::Lp(p));
                n * n / (2.0 * (p - 1.0))
            }
            MirrorKind::NegativeEntropy => x
                .iter()
                .map(|&v| match v {
                    v if v > 0.0 => v * v.ln(),
                    0.0 => 0.0,
                    _ => f64::INFINITY,
                })
                .sum(),
        }
    }

    /// `∇R(x)`; the entropy gradient needs every coordinate positive.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        if let MirrorKind::NegativeEntropy = self.kind {
            if let Some(i) = x.iter().position(|&v| !(v > 0.0)) {
                return Err(Error::Domain(format!(
                    "entropy gradient undefined at x[{i}] = {}",
                    x[i]
                )));
            }
        }
        Ok(self.grad_clamped(x))
    }

    /// `∇R(x)` with entropy coordinates floored at the smallest positive
    /// float, for use by solvers that may touch the boundary.
    pub fn grad_clamped(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            MirrorKind::SquaredL2 => x.to_vec(),
            MirrorKind::SquaredLp { p } => {
                let n = norm(x, NormSpec::Lp(p));
                if n == 0.0 {
                    return vec![0.0; x.len()];
                }
                x.iter()
                    .map(|&v| n * (v.abs() / n).powf(p - 1.0).copysign(v) / (p - 1.0))
                    .collect()
            }
            MirrorKind::NegativeEntropy => x.iter().map(|&v| 1.0 + v.max(f64::MIN_POSITIVE).ln()).collect(),
        }
    }

    /// `∇R*(y)`, the unconstrained inverse of the gradient map.
    pub fn grad_conjugate(&self, y: &[f64]) -> Vec<f64> {
        match self.kind {
            MirrorKind::SquaredL2 => y.to_vec(),
            MirrorKind::SquaredLp { p } => {
                let q = p / (p - 1.0);
                let n = norm(y, NormSpec::Lp(q));
                if n == 0.0 {
                    return vec![0.0; y.len()];
                }
                y.iter()
                    .map(|&v| (p - 1.0) * n * (v.abs() / n).powf(q - 1.0).copysign(v))
                    .collect()
            }
            MirrorKind::NegativeEntropy => y.iter().map(|&v| (v - 1.0).exp()).collect(),
        }
    }

    /// `B_R(y, x) = R(y) − R(x) − ∇R(x)·(y − x)`.
    pub fn bregman(&self, y: &[f64], x: &[f64]) -> Result<f64> {
        match self.kind {
            MirrorKind::SquaredL2 => Ok(0.5 * crate::vecspace::dist2_sq(y, x)),
            MirrorKind::SquaredLp { .. } => {
                let g = self.grad(x)?;
                Ok(self.value(y) - self.value(x) - dot(&g, &sub(y, x)))
            }
            MirrorKind::NegativeEntropy => {
                if let Some(i) = x.iter().position(|&v| !(v > 0.0)) {
                    return Err(Error::Domain(format!(
                        "Bregman divergence needs x[{i}] > 0, got {}",
                        x[i]
                    )));
                }
                // generalized KL; equals KL on the simplex
                Ok(y.iter()
                    .zip(x)
                    .map(|(&a, &b)| {
                        let t = if a > 0.0 { a * (a / b).ln() } else { 0.0 };
                        t - a + b
                    })
                    .sum())
            }
        }
    }

    /// `argmin_{x ∈ X} R`.
    pub fn center(&self, d: usize) -> Vec<f64> {
        match self.kind {
            MirrorKind::NegativeEntropy => vec![1.0 / d as f64; d],
            _ => vec![0.0; d],
        }
    }

    /// `√(max_X R − min_X R)`: a valid distance bound for runs started at
    /// the center. `None` on unbounded domains.
    pub fn dist_bound(&self, d: usize) -> Option<f64> {
        let spread = match (self.kind, self.domain) {
            (MirrorKind::NegativeEntropy, _) => (d as f64).ln(),
            (MirrorKind::SquaredL2, DomainSpec::L2Ball { radius }) => 0.5 * radius * radius,
            (MirrorKind::SquaredLp { p }, DomainSpec::LpBall { radius, .. }) => radius * radius / (2.0 * (p - 1.0)),
            _ => return None,
        };
        Some(spread.sqrt())
    }

    /// `argmin_{x ∈ X} B_R(x, ∇R*(y))`, i.e. `argmin_{x ∈ X} R(x) − y·x`.
    pub fn bregman_project(&self, y: &[f64]) -> Result<Vec<f64>> {
        match (self.kind, self.domain) {
            (MirrorKind::NegativeEntropy, _) => Ok(softmax(y)),
            (MirrorKind::SquaredL2, dom) => project(y, dom),
            (MirrorKind::SquaredLp { .. }, DomainSpec::Unconstrained) => Ok(self.grad_conjugate(y)),
            (MirrorKind::SquaredLp { p }, DomainSpec::LpBall { radius, .. }) => {
                project_lp_dual(self.grad_conjugate(y), p, radius)
            }
            (kind, dom) => Err(Error::Config(format!("no Bregman projection for {kind:?} on {dom:?}"))),
        }
    }

    /// The point whose gradient image is `(β∇R(x_t) − g)/(β + λ)`, projected
    /// back onto the domain:
    ///
    /// `argmin_{x ∈ X} g·(x − x_t) + β B_R(x, x_t) + λ R(x)`.
    pub fn mirror_step(&self, x_t: &[f64], g: &[f64], beta: f64, lambda: f64) -> Result<Vec<f64>> {
        if !(beta > 0.0 && lambda >= 0.0) {
            return Err(Error::Config(format!(
                "mirror step needs β > 0 and λ ≥ 0, got β = {beta}, λ = {lambda}"
            )));
        }
        let y = self.step_target(x_t, g, beta, lambda)?;
        let x = self.bregman_project(&y)?;
        let residual = self.stationarity_residual(&x, &y);
        if !(residual <= tolerances::BREGMAN_STATIONARITY) {
            return Err(Error::SolverFailure {
                solver: "Bregman projection",
                residual,
            });
        }
        Ok(x)
    }

    /// Dual point `(β∇R(x_t) − g)/(β + λ)` of the regularized step.
    fn step_target(&self, x_t: &[f64], g: &[f64], beta: f64, lambda: f64) -> Result<Vec<f64>> {
        let r = self.grad(x_t)?;
        let c = beta + lambda;
        let keep = beta / c;
        Ok(r.iter().zip(g).map(|(ri, gi)| keep * ri - gi / c).collect())
    }

    /// `g·(x − x_t) + β B_R(x, x_t) + λ R(x)`.
    pub fn step_objective(&self, x: &[f64], x_t: &[f64], g: &[f64], beta: f64, lambda: f64) -> Result<f64> {
        Ok(dot(g, &sub(x, x_t)) + beta * self.bregman(x, x_t)? + lambda * self.value(x))
    }

    /// First-order optimality residual of `x = argmin_X R(x) − y·x` along
    /// feasible directions, relative to `max(1, ‖y‖_∞)`.
    pub fn stationarity_residual(&self, x: &[f64], y: &[f64]) -> f64 {
        let r: Vec<f64> = self.grad_clamped(x).iter().zip(y).map(|(a, b)| a - b).collect();
        let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let raw = match self.domain {
            DomainSpec::Unconstrained => norm2(&r),
            DomainSpec::Simplex => {
                // stationary iff ∇ is constant on the support and no smaller off it
                let active: Vec<f64> = r.iter().zip(x).filter(|(_, &xi)| xi > 0.0).map(|(a, _)| *a).collect();
                let lo = active.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = active.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let off = r
                    .iter()
                    .zip(x)
                    .filter(|(_, &xi)| xi <= 0.0)
                    .map(|(a, _)| (lo - a).max(0.0))
                    .fold(0.0, f64::max);
                (hi - lo).max(off)
            }
            DomainSpec::L2Ball { .. } | DomainSpec::LpBall { .. } => {
                let normal = match self.domain {
                    DomainSpec::LpBall { p, .. } => x.iter().map(|&v| v.abs().powf(p - 1.0).copysign(v)).collect(),
                    _ => x.to_vec(),
                };
                let nn = dot(&normal, &normal);
                let on_boundary = !self.domain.contains_tol(x, -1e-9);
                let nu = if on_boundary && nn > 0.0 {
                    (-dot(&r, &normal) / nn).max(0.0)
                } else {
                    0.0
                };
                let adj: Vec<f64> = r.iter().zip(&normal).map(|(a, n)| a + nu * n).collect();
                norm2(&adj)
            }
        };
        raw / scale
    }
}

/// `exp(y − max y)` normalized.
fn softmax(y: &[f64]) -> Vec<f64> {
    let m = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = y.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// Bregman projection of `x̃` onto `{‖x‖_p ≤ r}` for `R = ‖x‖_p²/(2(p−1))`.
///
/// The multiplier `μ` on `½‖x‖_p² ≤ ½r²` gives `x(μ) = x̃ / (1 + (p−1)μ)`;
/// `μ` is found by bisection on the constraint residual.
fn project_lp_dual(x_tilde: Vec<f64>, p: f64, radius: f64) -> Result<Vec<f64>> {
    let n0 = norm(&x_tilde, NormSpec::Lp(p));
    if n0 <= radius {
        return Ok(x_tilde);
    }
    let at = |mu: f64| 1.0 / (1.0 + (p - 1.0) * mu);
    let residual = |mu: f64| n0 * at(mu) - radius;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while residual(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::SolverFailure {
                solver: "ℓp Bregman projection bracket",
                residual: residual(lo),
            });
        }
    }
    // bisect to float resolution; the tolerance is only the acceptance test
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let res = residual(hi);
    if res.abs() > tolerances::LP_BISECTION * radius {
        return Err(Error::SolverFailure {
            solver: "ℓp Bregman projection bisection",
            residual: res,
        });
    }
    let s = at(hi);
    Ok(x_tilde.iter().map(|v| v * s).collect())
}

/// Worst violations of the two-sided relative bounds
/// `μ B(y,x) ≤ f(y) − f(x) − ∇f(x)·(y−x) ≤ L B(y,x)` over sampled pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeSmoothnessReport {
    pub smoothness: f64,
    pub strong_convexity: f64,
    pub pairs: usize,
    pub max_smoothness_violation: f64,
    pub max_strong_convexity_violation: f64,
    pub pass: bool,
}

/// Checks that `f` is `smoothness`-smooth and `strong_convexity`-strongly
/// convex relative to `mirror` on the given `(x, y)` pairs.
pub fn check_relative_smoothness<F: Objective + ?Sized>(
    f: &F,
    mirror: &MirrorMap,
    smoothness: f64,
    strong_convexity: f64,
    pairs: &[(Vec<f64>, Vec<f64>)],
    slack: f64,
) -> Result<RelativeSmoothnessReport> {
    let mut smooth_viol = f64::NEG_INFINITY;
    let mut strong_viol = f64::NEG_INFINITY;
    for (x, y) in pairs {
        let (fx, gx) = f.value_and_grad(x);
        let fy = f.value(y);
        let lin = fy - fx - dot(&gx, &sub(y, x));
        let b = mirror.bregman(y, x)?;
        smooth_viol = smooth_viol.max(lin - smoothness * b);
        strong_viol = strong_viol.max(strong_convexity * b - lin);
    }
    let smooth_viol = smooth_viol.max(0.0);
    let strong_viol = strong_viol.max(0.0);
    Ok(RelativeSmoothnessReport {
        smoothness,
        strong_convexity,
        pairs: pairs.len(),
        max_smoothness_violation: smooth_viol,
        max_strong_convexity_violation: strong_viol,
        pass: smooth_viol <= slack && strong_viol <= slack,
    })
}

/// [`check_relative_smoothness`] with the constants `(β + λ, λ)` that hold
/// for `F_S + λR` when the loss is β-smooth in the mirror's norm.
pub fn check_regularized_relative_smoothness(
    f: &RegularizedRisk<'_>,
    mirror: &MirrorMap,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<RelativeSmoothnessReport> {
    let beta = f.base.loss().beta;
    check_relative_smoothness(
        f,
        mirror,
        beta + f.lambda,
        f.lambda,
        pairs,
        tolerances::INEQUALITY_SLACK,
    )
}

/// A point pair showing that `‖x‖_p²` is not `β`-smooth in `ℓp`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessCounterexample {
    pub p: f64,
    pub beta: f64,
    pub epsilon: f64,
    /// `f(y) − f(x) − ∇f(x)·(y − x) = (1 + ε^p)^{2/p} − 1`
    pub linearization_gap: f64,
    /// `(β/2)‖y − x‖_p² = βε²/2`
    pub quadratic_bound: f64,
}

/// Searches `ε = 10^{−k/4}` downward for `x = e_1`, `y = e_1 + ε e_2` with
/// `(1 + ε^p)^{2/p} − 1 > βε²/2`. `None` if no such `ε ≥ 1e-300` exists.
pub fn lp_smoothness_counterexample(p: f64, beta: f64) -> Option<SmoothnessCounterexample> {
    (0..1200).find_map(|k| {
        let epsilon = 10f64.powf(-(k as f64) / 4.0);
        if epsilon < 1e-300 {
            return None;
        }
        let linearization_gap = (2.0 / p * epsilon.powf(p).ln_1p()).exp_m1();
        let quadratic_bound = beta * epsilon * epsilon / 2.0;
        (linearization_gap > quadratic_bound).then_some(SmoothnessCounterexample {
            p,
            beta,
            epsilon,
            linearization_gap,
            quadratic_bound,
        })
    })
}
