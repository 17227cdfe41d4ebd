//! Uniformly stable mirror descent.
//!
//! Every step solves
//! `x_{t+1} = argmin_X ∇F_S(x_t)·(x − x_t) + β B_R(x, x_t) + λ R(x)`,
//! which is a plain mirror step on `F_S + λR` with coefficient `β + λ`.
//! The regularized objective is `λ`-strongly convex relative to `R`, so the
//! iterates contract geometrically toward its minimizer `x*_λ`; stability
//! follows from that contraction and convergence from `λ` being small.

use serde::{Deserialize, Serialize};

use crate::base_opt::{oracle_minimize, oracle_minimize_relative, OracleOptions, OracleSolution};
use crate::check::Inequality;
use crate::mirror::{MirrorKind, MirrorMap};
use crate::objectives::{EmpiricalRisk, Objective, RegularizedRisk};
use crate::vecspace::{dist2_sq, is_finite, norm, sub, DomainSpec, NormSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorConfig {
    pub mirror: MirrorMap,
    /// Smoothness of the loss w.r.t. the mirror's norm.
    pub beta: f64,
    /// Lipschitz constant of the loss w.r.t. the mirror's norm.
    pub lipschitz: f64,
    /// `D² ≥ R(x*) − R(x_0)`.
    pub dist_bound: f64,
    pub n: usize,
    pub steps: usize,
    pub lambda: f64,
}

/// `λ = (β/T)·max{1, 2 log₂(βDn/(GT))}`.
pub fn default_lambda(beta: f64, lipschitz: f64, dist_bound: f64, n: usize, steps: usize) -> f64 {
    let t = steps as f64;
    let boost = 2.0 * (beta * dist_bound * n as f64 / (lipschitz * t)).log2();
    beta / t * boost.max(1.0)
}

impl MirrorConfig {
    /// A configuration with the default `λ`.
    pub fn new(mirror: MirrorMap, beta: f64, lipschitz: f64, dist_bound: f64, n: usize, steps: usize) -> Self {
        MirrorConfig {
            mirror,
            beta,
            lipschitz,
            dist_bound,
            n,
            steps,
            lambda: default_lambda(beta, lipschitz, dist_bound, n, steps),
        }
    }

    /// Takes `β`, `G` and `n` from the risk.
    pub fn for_risk(mirror: MirrorMap, risk: &EmpiricalRisk, dist_bound: f64, steps: usize) -> Self {
        MirrorConfig::new(
            mirror,
            risk.loss().beta,
            risk.loss().lipschitz,
            dist_bound,
            risk.n(),
            steps,
        )
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        MirrorConfig { lambda, ..self }
    }

    /// `T ≥ 2 log₂(βDn/G)`.
    pub fn precondition_holds(&self) -> bool {
        let need = 2.0 * (self.beta * self.dist_bound * self.n as f64 / self.lipschitz).log2();
        self.steps as f64 >= need
    }

    /// True when `λ` is the formula value, which the distance and stability
    /// guarantees assume.
    pub fn uses_default_lambda(&self) -> bool {
        self.lambda == default_lambda(self.beta, self.lipschitz, self.dist_bound, self.n, self.steps)
    }

    /// `x_0 = argmin_X R`.
    pub fn start(&self, d: usize) -> Vec<f64> {
        self.mirror.center(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("β", self.beta), ("G", self.lipschitz), ("D", self.dist_bound)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(format!(
                "λ must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        MirrorMap::new(self.mirror.kind, self.mirror.domain).map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorTrace {
    pub lambda: f64,
    pub beta: f64,
    pub precondition_holds: bool,
    /// `x_0, …, x_T`.
    pub iterates: Vec<Vec<f64>>,
}

impl MirrorTrace {
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn start(&self) -> &[f64] {
        &self.iterates[0]
    }

    /// The algorithm's output `x_T`.
    pub fn final_iterate(&self) -> &[f64] {
        self.iterates.last().expect("a trace holds at least x_0")
    }
}

/// Runs the method on `F_S`; the loss constants must be certified in the
/// mirror's norm.
pub fn run_stabreg_rel(cfg: &MirrorConfig, risk: &EmpiricalRisk) -> Result<MirrorTrace> {
    if risk.loss().norm != cfg.mirror.norm() {
        return Err(Error::Config(format!(
            "the loss is certified for {:?} but the mirror map is strongly convex w.r.t. {:?}",
            risk.loss().norm,
            cfg.mirror.norm()
        )));
    }
    run_stabreg_rel_on(cfg, risk)
}

/// Runs the method on any objective that is `β`-smooth relative to `R`.
pub fn run_stabreg_rel_on<F: Objective + ?Sized>(cfg: &MirrorConfig, f: &F) -> Result<MirrorTrace> {
    cfg.validate()?;
    let mut x = cfg.start(f.dim());
    let mut iterates = Vec::with_capacity(cfg.steps + 1);
    iterates.push(x.clone());
    for t in 0..cfg.steps {
        let g = f.gradient(&x);
        if !is_finite(&g) {
            return Err(Error::NonFiniteGradient { iteration: t });
        }
        x = cfg
            .mirror
            .mirror_step(&x, &g, cfg.beta, cfg.lambda)
            .map_err(|e| e.context(format!("mirror step {t}")))?;
        iterates.push(x.clone());
    }
    Ok(MirrorTrace {
        lambda: cfg.lambda,
        beta: cfg.beta,
        precondition_holds: cfg.precondition_holds(),
        iterates,
    })
}

/// Certified `x*_λ = argmin_X F + λR`, to distance `1e-9`.
pub fn regularized_minimizer<F: Objective + ?Sized>(
    f: &F,
    mirror: &MirrorMap,
    lambda: f64,
    beta: f64,
) -> Result<OracleSolution> {
    let opts = OracleOptions {
        dist_tol: Some(1e-9),
        smoothness: Some(beta + lambda),
        ..OracleOptions::default()
    };
    oracle_minimize_relative(f, mirror, lambda, &opts).map_err(|e| e.context("oracle for the regularized risk"))
}

/// Certified unregularized `x* = argmin_X F_S` on the mirror's (bounded)
/// domain, using the data curvature as the strong-convexity modulus.
pub fn risk_minimizer_on(risk: &EmpiricalRisk, mirror: &MirrorMap) -> Result<OracleSolution> {
    let mu = risk
        .strong_convexity_on_domain(mirror.domain)
        .ok_or_else(|| Error::Config("the empirical risk is not certifiably strongly convex on this domain".into()))?;
    let opts = OracleOptions {
        dist_tol: Some(1e-9),
        smoothness: Some(risk.loss().beta),
        start: Some(mirror.center(risk.dim())),
        ..OracleOptions::default()
    };
    oracle_minimize(risk, mirror.domain, mu, &opts).map_err(|e| e.context("oracle for the empirical risk"))
}

/// The worst instance of one family of per-step inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFamily {
    pub checked: usize,
    /// Step at which `lhs − factor·rhs` is largest.
    pub worst_step: usize,
    pub worst: Inequality,
    pub pass: bool,
}

impl StepFamily {
    fn collect(items: impl Iterator<Item = (usize, Inequality)>, factor: f64, slack: f64) -> Option<Self> {
        let mut out: Option<StepFamily> = None;
        let mut worst_excess = f64::NEG_INFINITY;
        let mut checked = 0;
        let mut pass = true;
        for (t, ineq) in items {
            checked += 1;
            pass &= ineq.holds_scaled(factor, slack);
            let excess = ineq.lhs - factor * ineq.rhs;
            if out.is_none() || excess > worst_excess || excess.is_nan() {
                worst_excess = excess;
                out = Some(StepFamily {
                    checked: 0,
                    worst_step: t,
                    worst: ineq,
                    pass: true,
                });
            }
        }
        out.map(|s| StepFamily { checked, pass, ..s })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MirrorLemmaReport {
    pub lambda: f64,
    pub beta: f64,
    /// `h(x_{t+1}) ≤ h(x_t)` for `h = F + λR`.
    pub monotone: Option<StepFamily>,
    /// `B(x*_λ, x_{t+1}) ≤ (1 − λ/(λ+β)) B(x*_λ, x_t)`; `None` when `λ = 0`.
    pub contraction: Option<StepFamily>,
    /// `B(x*_λ, x_t) ≤ (1 − λ/(λ+β))^t B(x*_λ, x_0)`; `None` when `λ = 0`.
    pub contraction_total: Option<StepFamily>,
    /// `h(x_t) − h(x) ≤ λ B(x, x_0)/((1 + λ/β)^t − 1)` over `t ≥ 1` and
    /// every probe `x` (the first probe is `x*_λ`).
    pub rate: Option<StepFamily>,
    pub additive_slack: f64,
    pub factor: f64,
    /// Bregman values below this are treated as converged.
    pub floor: f64,
    pub pass: bool,
}

/// Monotonicity, linear contraction toward `x*_λ`, and the relative rate
/// bound along a trace of the regularized method.
pub fn check_rel_mirror_lemma<F: Objective + ?Sized>(
    trace: &MirrorTrace,
    f: &F,
    mirror: &MirrorMap,
    x_lambda: &[f64],
    probes: &[Vec<f64>],
) -> Result<MirrorLemmaReport> {
    let (lambda, beta) = (trace.lambda, trace.beta);
    let additive_slack = crate::tolerances::LEMMA_SLACK;
    let factor = 1.01;
    let floor = 1e-12;
    let h = RegularizedRisk::mirror(f, lambda, *mirror);
    let values: Vec<f64> = trace.iterates.iter().map(|x| h.value(x)).collect();

    let monotone = StepFamily::collect(
        values
            .windows(2)
            .enumerate()
            .map(|(t, w)| (t + 1, Inequality::new(w[1], w[0]))),
        1.0,
        additive_slack,
    );

    let (contraction, contraction_total) = if lambda > 0.0 {
        let rho = beta / (beta + lambda);
        let b: Vec<f64> = trace
            .iterates
            .iter()
            .map(|x| mirror.bregman(x_lambda, x))
            .collect::<Result<_>>()?;
        let step = StepFamily::collect(
            b.windows(2)
                .enumerate()
                .filter(|(_, w)| w[0] > floor)
                .map(|(t, w)| (t + 1, Inequality::new(w[1], rho * w[0]))),
            factor,
            floor,
        );
        let total = StepFamily::collect(
            b.iter()
                .enumerate()
                .map(|(t, &bt)| (t, Inequality::new(bt, rho.powi(t as i32) * b[0]))),
            factor,
            floor,
        );
        (step, total)
    } else {
        (None, None)
    };

    let mut points = vec![x_lambda.to_vec()];
    points.extend(probes.iter().cloned());
    let x0 = trace.start();
    let mut rate_items = Vec::new();
    for x in &points {
        let hx = h.value(x);
        let b0 = mirror.bregman(x, x0)?;
        for (t, &ht) in values.iter().enumerate().skip(1) {
            rate_items.push((t, Inequality::new(ht - hx, rate_bound(lambda, beta, b0, t))));
        }
    }
    let rate = StepFamily::collect(rate_items.into_iter(), factor, additive_slack);

    let pass = [&monotone, &contraction, &contraction_total, &rate]
        .iter()
        .all(|c| c.as_ref().is_none_or(|c| c.pass));
    Ok(MirrorLemmaReport {
        lambda,
        beta,
        monotone,
        contraction,
        contraction_total,
        rate,
        additive_slack,
        factor,
        floor,
        pass,
    })
}

/// `λ B / ((1 + λ/β)^t − 1)`, which tends to `β B / t` as `λ → 0`.
pub fn rate_bound(lambda: f64, beta: f64, bregman: f64, t: usize) -> f64 {
    if lambda == 0.0 {
        return beta * bregman / t as f64;
    }
    lambda * bregman / (t as f64 * (lambda / beta).ln_1p()).exp_m1()
}

/// `B(x*_λ, x_0) ≤ R(x*_λ) − R(x_0) ≤ R(x*) − R(x_0) ≤ D²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorChain {
    pub bregman_vs_lambda_gain: Inequality,
    pub lambda_gain_vs_star_gain: Inequality,
    pub star_gain_vs_bound: Inequality,
    pub slack: f64,
    pub pass: bool,
}

pub fn anchor_chain(
    mirror: &MirrorMap,
    x0: &[f64],
    x_lambda: &[f64],
    x_star: &[f64],
    dist_bound: f64,
    slack: f64,
) -> Result<AnchorChain> {
    let r0 = mirror.value(x0);
    let gain_lambda = mirror.value(x_lambda) - r0;
    let gain_star = mirror.value(x_star) - r0;
    let links = [
        Inequality::new(mirror.bregman(x_lambda, x0)?, gain_lambda),
        Inequality::new(gain_lambda, gain_star),
        Inequality::new(gain_star, dist_bound * dist_bound),
    ];
    Ok(AnchorChain {
        bregman_vs_lambda_gain: links[0],
        lambda_gain_vs_star_gain: links[1],
        star_gain_vs_bound: links[2],
        slack,
        pass: links.iter().all(|l| l.holds(slack)),
    })
}

/// Computes `x*` and `x*_λ` for the configuration and checks the chain.
pub fn check_breg_anchor_bound(cfg: &MirrorConfig, risk: &EmpiricalRisk) -> Result<AnchorChain> {
    let x_lambda = regularized_minimizer(risk, &cfg.mirror, cfg.lambda, cfg.beta)?;
    let x_star = risk_minimizer_on(risk, &cfg.mirror)?;
    anchor_chain(
        &cfg.mirror,
        &cfg.start(risk.dim()),
        &x_lambda.x,
        &x_star.x,
        cfg.dist_bound,
        crate::tolerances::INEQUALITY_SLACK,
    )
}

/// `F(x_T) − F(x*) ≤ 2λ(R(x*) − R(x_0))`, the explicit final-gap constant.
/// Needs `(1 + λ/β)^T ≥ 2`, which every `λ ≥ β/T` satisfies.
pub fn final_gap_inequality<F: Objective + ?Sized>(
    trace: &MirrorTrace,
    f: &F,
    mirror: &MirrorMap,
    x_star: &[f64],
) -> Inequality {
    let d2 = mirror.value(x_star) - mirror.value(trace.start());
    Inequality::new(
        f.value(trace.final_iterate()) - f.value(x_star),
        2.0 * trace.lambda * d2,
    )
}

/// `‖x*_λ − x_T‖ ≤ √2 G T/(βn)` in the mirror's norm; `None` when the run
/// is outside the guarantee (precondition violated or `λ` overridden).
pub fn distance_bound_inequality(cfg: &MirrorConfig, trace: &MirrorTrace, x_lambda: &[f64]) -> Option<Inequality> {
    if !(trace.precondition_holds && cfg.uses_default_lambda()) {
        return None;
    }
    let lhs = norm(&sub(x_lambda, trace.final_iterate()), cfg.mirror.norm());
    let rhs = std::f64::consts::SQRT_2 * cfg.lipschitz * cfg.steps as f64 / (cfg.beta * cfg.n as f64);
    Some(Inequality::new(lhs, rhs))
}

/// Minimizer of `c·x + κR(x)` over the mirror's domain, computed without
/// the mirror map's dual-point formula.
///
/// Entropy: the stationarity condition gives `x_i = exp(a_i − w)` with
/// `a_i = −c_i/κ − 1`, and the normalizer `w` is bisected until the
/// coordinates sum to one. Norm balls: for `‖x‖_p = s` the linear term is
/// at least `−s‖c‖_q` with equality along the Hölder-dual direction of
/// `−c`, which leaves a scalar problem in `s` solved by bisection on its
/// derivative.
fn direct_step(mirror: &MirrorMap, c: &[f64], kappa: f64) -> Result<Vec<f64>> {
    let p = match mirror.kind {
        MirrorKind::NegativeEntropy => {
            let a: Vec<f64> = c.iter().map(|ci| -ci / kappa - 1.0).collect();
            let top = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mass = |w: f64| a.iter().map(|ai| (ai - w).exp()).sum::<f64>();
            let (mut lo, mut hi) = (top, top + (a.len() as f64).ln());
            for _ in 0..2000 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if mass(mid) > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let w = if (mass(lo) - 1.0).abs() < (mass(hi) - 1.0).abs() {
                lo
            } else {
                hi
            };
            return Ok(a.iter().map(|ai| (ai - w).exp()).collect());
        }
        MirrorKind::SquaredL2 => 2.0,
        MirrorKind::SquaredLp { p } => p,
    };
    let q = p / (p - 1.0);
    let c_norm = norm(c, NormSpec::Lp(q));
    if c_norm == 0.0 {
        return Ok(vec![0.0; c.len()]);
    }
    let cap = match mirror.domain {
        DomainSpec::L2Ball { radius } | DomainSpec::LpBall { radius, .. } => radius,
        _ => f64::INFINITY,
    };
    // φ(s) = −s‖c‖_q + κ s²/(2(p−1)) is convex with φ'(0) < 0
    let slope = |s: f64| -c_norm + kappa * s / (p - 1.0);
    let mut hi = 1.0_f64.min(cap);
    while slope(hi) < 0.0 && hi < cap {
        hi = (2.0 * hi).min(cap);
    }
    let level = if slope(hi) < 0.0 {
        cap
    } else {
        let mut lo = 0.0;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if slope(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let scale = level / c_norm.powf(q - 1.0);
    Ok(c.iter()
        .map(|ci| -scale * ci.abs().powf(q - 1.0).copysign(*ci))
        .collect())
}

/// Three computations of one regularized step, pairwise ℓ2 distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepEquivalence {
    /// Production step vs. a plain mirror step on `F + λR` with `β + λ`.
    pub step_vs_mirror: f64,
    /// Production step vs. a direct minimization of the step objective.
    pub step_vs_direct: f64,
    /// Stationarity residual of the direct solution.
    pub direct_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Computes the regularized step three ways: the production step, a mirror
/// step on `g + λ∇R(x_t)` with coefficient `β + λ`, and [`direct_step`] on
/// `c = g − β∇R(x_t)`, `κ = β + λ`.
pub fn check_step_equivalence(
    mirror: &MirrorMap,
    x_t: &[f64],
    g: &[f64],
    beta: f64,
    lambda: f64,
    tol: f64,
) -> Result<StepEquivalence> {
    let step = mirror.mirror_step(x_t, g, beta, lambda)?;
    let grad_r_t = mirror.grad(x_t)?;
    let g_reg: Vec<f64> = g.iter().zip(&grad_r_t).map(|(a, b)| a + lambda * b).collect();
    let via_mirror = mirror.mirror_step(x_t, &g_reg, beta + lambda, 0.0)?;
    let kappa = beta + lambda;
    let c: Vec<f64> = g.iter().zip(&grad_r_t).map(|(a, b)| a - beta * b).collect();
    let direct = direct_step(mirror, &c, kappa).map_err(|e| e.context("direct step minimization"))?;
    let target: Vec<f64> = c.iter().map(|v| -v / kappa).collect();
    let step_vs_mirror = dist2_sq(&step, &via_mirror).sqrt();
    let step_vs_direct = dist2_sq(&step, &direct).sqrt();
    Ok(StepEquivalence {
        step_vs_mirror,
        step_vs_direct,
        direct_residual: mirror.stationarity_residual(&direct, &target),
        tol,
        pass: step_vs_mirror <= tol && step_vs_direct <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_opt::{run_base, BaseOptimizer, OptimizeRequest};
    use crate::mirror::MirrorKind;
    use crate::objectives::{LossKind, LossModel, Quadratic, SyntheticSpec};
    use crate::vecspace::{sample_point, DomainSpec, NormSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn simplex_risk(seed: u64, n: usize, d: usize) -> EmpiricalRisk {
        let data = SyntheticSpec::classification(seed, n, d, 1.0, NormSpec::L1)
            .generate()
            .unwrap();
        let loss = LossModel::certified(LossKind::Logistic, &data).unwrap();
        EmpiricalRisk::new(data, loss).unwrap()
    }

    #[test]
    fn default_lambda_formula_and_floor() {
        // βDn/(GT) = 8 → λ = (β/T)·6
        let l = default_lambda(1.0, 1.0, 2.0, 400, 100);
        assert!((l - 0.06).abs() < 1e-15);
        // argument below √2 → floor β/T
        assert_eq!(default_lambda(2.0, 1.0, 1.0, 10, 100), 0.02);
    }

    #[test]
    fn precondition_flag() {
        let m = MirrorMap::entropy();
        // 2 log₂(1·1·1024/1) = 20
        assert!(MirrorConfig::new(m, 1.0, 1.0, 1.0, 1024, 20).precondition_holds());
        assert!(!MirrorConfig::new(m, 1.0, 1.0, 1.0, 1024, 19).precondition_holds());
    }

    #[test]
    fn zero_lambda_euclidean_matches_gradient_descent() {
        let f = Quadratic::new(vec![1.0, 4.0], vec![3.0, -1.0]);
        let m = MirrorMap::squared_l2(DomainSpec::Unconstrained).unwrap();
        let cfg = MirrorConfig::new(m, 4.0, 1.0, 1.0, 10, 30).with_lambda(0.0);
        let trace = run_stabreg_rel_on(&cfg, &f).unwrap();
        let req = OptimizeRequest {
            objective: &f,
            beta: 4.0,
            domain: DomainSpec::Unconstrained,
            start: &[0.0, 0.0],
            steps: 30,
        };
        assert_eq!(
            trace.final_iterate(),
            run_base(&BaseOptimizer::gd(), &req).unwrap().as_slice()
        );
    }

    #[test]
    fn loss_norm_must_match_mirror() {
        let r = simplex_risk(1, 20, 3);
        let m = MirrorMap::squared_l2(DomainSpec::L2Ball { radius: 1.0 }).unwrap();
        let cfg = MirrorConfig::for_risk(m, &r, 1.0, 10);
        assert!(matches!(run_stabreg_rel(&cfg, &r), Err(Error::Config(_))));
    }

    #[test]
    fn entropy_run_meets_final_gap_constant() {
        let r = simplex_risk(7, 200, 10);
        let m = MirrorMap::entropy();
        let cfg = MirrorConfig::for_risk(m, &r, (10f64).ln().sqrt(), 400);
        let trace = run_stabreg_rel(&cfg, &r).unwrap();
        assert_eq!(trace, run_stabreg_rel(&cfg, &r).unwrap());
        let star = risk_minimizer_on(&r, &m).unwrap();
        let gap = final_gap_inequality(&trace, &r, &m, &star.x);
        assert!(gap.holds(1e-8), "{gap:?}");
        assert!(gap.lhs >= -1e-10);
    }

    #[test]
    fn lemma_checks_pass_and_zero_lambda_is_not_applicable() {
        let r = simplex_risk(3, 80, 5);
        let m = MirrorMap::entropy();
        let beta = r.loss().beta;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let probes: Vec<Vec<f64>> = (0..5)
            .map(|_| sample_point(DomainSpec::Simplex, 5, 1.0, &mut rng))
            .collect();

        let cfg = MirrorConfig::for_risk(m, &r, 1.0, 150).with_lambda(beta / 10.0);
        let trace = run_stabreg_rel(&cfg, &r).unwrap();
        let xl = regularized_minimizer(&r, &m, cfg.lambda, beta).unwrap();
        let rep = check_rel_mirror_lemma(&trace, &r, &m, &xl.x, &probes).unwrap();
        assert!(rep.pass, "{rep:?}");
        let c = rep.contraction.unwrap();
        assert!(c.worst.lhs <= 1.01 * c.worst.rhs + 1e-12);
        // t = 0 holds with equality
        assert!(rep.contraction_total.unwrap().checked == 151);

        let cfg0 = cfg.with_lambda(0.0);
        let trace0 = run_stabreg_rel(&cfg0, &r).unwrap();
        let rep0 = check_rel_mirror_lemma(&trace0, &r, &m, trace0.final_iterate(), &[]).unwrap();
        assert!(rep0.contraction.is_none() && rep0.contraction_total.is_none());
    }

    #[test]
    fn anchor_chain_holds_and_shrinks_with_lambda() {
        let r = simplex_risk(5, 120, 6);
        let m = MirrorMap::entropy();
        let cfg = MirrorConfig::for_risk(m, &r, (6f64).ln().sqrt(), 200);
        let chain = check_breg_anchor_bound(&cfg, &r).unwrap();
        assert!(chain.pass, "{chain:?}");

        let beta = r.loss().beta;
        let mut last = f64::INFINITY;
        for scale in [1e-2, 1.0, 1e2, 1e3] {
            let c = check_breg_anchor_bound(&cfg.clone().with_lambda(scale * beta), &r).unwrap();
            assert!(c.pass);
            let gain = c.lambda_gain_vs_star_gain.lhs;
            assert!(gain <= last + 1e-12);
            last = gain;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn anchor_chain_degenerate_optimum() {
        let m = MirrorMap::entropy();
        let x0 = m.center(3);
        let c = anchor_chain(&m, &x0, &x0, &x0, 0.5, 1e-8).unwrap();
        assert!(c.pass);
        assert_eq!(c.bregman_vs_lambda_gain, Inequality::new(0.0, 0.0));
        assert_eq!(c.star_gain_vs_bound.rhs, 0.25);
    }

    #[test]
    fn step_equivalence_for_every_mirror_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let maps = [
            MirrorMap::entropy(),
            MirrorMap::squared_l2(DomainSpec::L2Ball { radius: 1.0 }).unwrap(),
            MirrorMap::new(
                MirrorKind::SquaredLp { p: 1.5 },
                DomainSpec::LpBall { p: 1.5, radius: 1.0 },
            )
            .unwrap(),
        ];
        for m in maps {
            for _ in 0..10 {
                let x = sample_point(m.domain, 4, 1.0, &mut rng);
                let g = sample_point(DomainSpec::Unconstrained, 4, 1.0, &mut rng);
                let eq = check_step_equivalence(&m, &x, &g, 2.0, 0.3, 1e-8).unwrap();
                assert!(eq.pass, "{:?}: {eq:?}", m.kind);
            }
        }
    }

    #[test]
    fn distance_bound_not_applicable_without_precondition() {
        let r = simplex_risk(2, 50, 3);
        let m = MirrorMap::entropy();
        let cfg = MirrorConfig::for_risk(m, &r, 1.0, 2);
        let trace = run_stabreg_rel(&cfg, &r).unwrap();
        assert!(!trace.precondition_holds);
        assert!(distance_bound_inequality(&cfg, &trace, trace.final_iterate()).is_none());
    }
}
