//! Uniformly stable black-box conversion for Euclidean geometry.
//!
//! A base optimizer `A` with rate `C β ‖x_0 − x*‖²/t^γ` is run in epochs on
//! `F_S(x) + (λ_k/2)‖x − x_0‖²`, with `λ_0 = β/4` halved after every epoch.
//! Epoch `k` makes `m_k` restarted calls of `T_{1/2,k}` steps each; the
//! anytime output `x_t` is the last completed epoch's result.

use serde::{Deserialize, Serialize};

use crate::base_opt::{risk_minimizer, run_base, BaseOptimizer, OptimizeRequest, OracleOptions, OracleSolution};
use crate::check::Inequality;
use crate::objectives::{EmpiricalRisk, Objective, RegularizedRisk};
use crate::par::{try_map_indexed, Execution};
use crate::vecspace::{dist2_sq, DomainSpec, NormSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrapperConfig {
    pub base: BaseOptimizer,
    /// Smoothness of the loss.
    pub beta: f64,
    /// Lipschitz constant of the loss.
    pub lipschitz: f64,
    /// `D ≥ ‖x_0 − x*‖`.
    pub dist_bound: f64,
    pub n: usize,
    pub start: Vec<f64>,
    pub max_steps: usize,
    pub domain: DomainSpec,
}

impl WrapperConfig {
    /// Takes `β`, `G` and `n` from the risk.
    pub fn for_risk(
        base: BaseOptimizer,
        risk: &EmpiricalRisk,
        dist_bound: f64,
        start: Vec<f64>,
        max_steps: usize,
        domain: DomainSpec,
    ) -> Self {
        WrapperConfig {
            base,
            beta: risk.loss().beta,
            lipschitz: risk.loss().lipschitz,
            dist_bound,
            n: risk.n(),
            start,
            max_steps,
            domain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for (name, v) in [("β", self.beta), ("G", self.lipschitz), ("D", self.dist_bound)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        match self.domain {
            DomainSpec::Unconstrained | DomainSpec::L2Ball { .. } => self.domain.validate()?,
            other => {
                return Err(Error::Config(format!(
                    "the epoch wrapper works in Euclidean geometry; {other:?} is not supported"
                )))
            }
        }
        if self.start.is_empty() || !self.domain.contains(&self.start) {
            return Err(Error::Config("start point must lie in the domain".into()));
        }
        Ok(())
    }

    /// `λ_k = β / 2^{k+2}`, or `None` once it falls below machine precision
    /// relative to `β`.
    pub fn lambda(&self, k: usize) -> Option<f64> {
        let ratio = 0.25 * 0.5f64.powi(k.min(i32::MAX as usize) as i32);
        (ratio >= f64::EPSILON).then_some(self.beta * ratio)
    }

    /// `m = max{1, ⌈2 log₂(λ D n / G)⌉}`.
    pub fn inner_calls(&self, lambda: f64) -> usize {
        let arg = lambda * self.dist_bound * self.n as f64 / self.lipschitz;
        let m = 2.0 * arg.log2();
        if m <= 1.0 {
            1
        } else {
            ceil_count(m)
        }
    }

    /// `T_{1/2} = ⌈(4C(1 + β/λ))^{1/γ}⌉`.
    pub fn half_steps(&self, lambda: f64) -> usize {
        let base = 4.0 * self.base.rate_c * (1.0 + self.beta / lambda);
        let g = self.base.rate_gamma;
        let t = if g == 2.0 {
            base.sqrt()
        } else if g == 1.0 {
            base
        } else {
            base.powf(1.0 / g)
        };
        ceil_count(t).max(1)
    }

    /// The first `k + 1` epochs of the schedule, ignoring the step budget.
    /// Shorter when `λ` underflows first.
    pub fn schedule(&self, k: usize) -> Vec<EpochParams> {
        let mut out = Vec::new();
        let mut start_step = 0usize;
        for i in 0..=k {
            let Some(lambda) = self.lambda(i) else { break };
            let p = EpochParams {
                k: i,
                lambda,
                inner_calls: self.inner_calls(lambda),
                half_steps: self.half_steps(lambda),
                start_step,
            };
            start_step = p.end_step();
            out.push(p);
        }
        out
    }

    /// Epochs that fit in `max_steps`, and why the schedule stops there.
    pub fn planned_epochs(&self) -> (Vec<EpochParams>, Termination, Option<EpochParams>) {
        let mut out = Vec::new();
        let mut k = 0;
        loop {
            let Some(p) = epoch_schedule(k, self) else {
                return (out, Termination::LambdaUnderflow, None);
            };
            if p.end_step() > self.max_steps {
                return (out, Termination::StepBudget, Some(p));
            }
            out.push(p);
            k += 1;
        }
    }
}

/// Ceiling that ignores float noise just above an integer.
fn ceil_count(v: f64) -> usize {
    let r = v.round();
    if (v - r).abs() <= 8.0 * f64::EPSILON * v.abs().max(1.0) {
        r as usize
    } else {
        v.ceil() as usize
    }
}

/// One epoch of the schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochParams {
    pub k: usize,
    pub lambda: f64,
    /// `m_k`
    pub inner_calls: usize,
    /// `T_{1/2,k}`
    pub half_steps: usize,
    /// `t_k`
    pub start_step: usize,
}

impl EpochParams {
    /// `t_{k+1} = t_k + T_{1/2,k} m_k`.
    pub fn end_step(&self) -> usize {
        self.start_step
            .saturating_add(self.half_steps.saturating_mul(self.inner_calls))
    }
}

/// Schedule record for epoch `k`; `None` once `λ_k` underflows.
pub fn epoch_schedule(k: usize, cfg: &WrapperConfig) -> Option<EpochParams> {
    cfg.schedule(k).into_iter().nth(k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The next epoch would end after `max_steps`.
    StepBudget,
    /// `λ_k` fell below machine precision.
    LambdaUnderflow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub params: EpochParams,
    /// `y_k`
    pub start: Vec<f64>,
    /// `y_{k,1}, …, y_{k,m_k}`; the last one is `y_{k+1}`.
    pub inner: Vec<Vec<f64>>,
}

impl EpochRecord {
    /// `y_{k+1}`
    pub fn end(&self) -> &[f64] {
        self.inner.last().map_or(&self.start, |v| v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexTrace {
    pub beta: f64,
    pub start: Vec<f64>,
    pub max_steps: usize,
    pub epochs: Vec<EpochRecord>,
    /// The first epoch that did not fit in the budget.
    pub pending: Option<EpochParams>,
    pub termination: Termination,
}

impl ConvexTrace {
    /// Number of epochs finished by step `t`.
    pub fn completed_by(&self, t: usize) -> usize {
        self.epochs.iter().take_while(|e| e.params.end_step() <= t).count()
    }

    /// `x_t = y_k` for `t ∈ [t_k, t_{k+1})`.
    pub fn x_at(&self, t: usize) -> &[f64] {
        match self.completed_by(t.min(self.max_steps)) {
            0 => &self.start,
            c => self.epochs[c - 1].end(),
        }
    }

    pub fn final_iterate(&self) -> &[f64] {
        self.x_at(self.max_steps)
    }

    /// Index and `λ` of the epoch in progress at step `t`.
    pub fn epoch_at(&self, t: usize) -> (usize, f64) {
        let c = self.completed_by(t);
        (c, self.beta * 0.25 * 0.5f64.powi(c as i32))
    }

    /// `y_0, y_1, …` with the step at which each becomes the output.
    pub fn outputs(&self) -> Vec<(usize, &[f64])> {
        let mut v = vec![(0, self.start.as_slice())];
        v.extend(self.epochs.iter().map(|e| (e.params.end_step(), e.end())));
        v
    }
}

/// Runs the wrapper on `F_S`; the loss must be certified in ℓ2.
pub fn run_stabreg_convex(cfg: &WrapperConfig, risk: &EmpiricalRisk) -> Result<ConvexTrace> {
    if risk.loss().norm != NormSpec::L2 {
        return Err(Error::Config(format!(
            "the epoch wrapper needs ℓ2 constants, the loss is certified for {:?}",
            risk.loss().norm
        )));
    }
    run_stabreg_convex_on(cfg, risk)
}

/// Runs the wrapper on any smooth convex objective.
pub fn run_stabreg_convex_on<F: Objective + ?Sized>(cfg: &WrapperConfig, f: &F) -> Result<ConvexTrace> {
    cfg.validate()?;
    if cfg.start.len() != f.dim() {
        return Err(Error::Config(format!(
            "start has dimension {}, objective {}",
            cfg.start.len(),
            f.dim()
        )));
    }
    let mut epochs = Vec::new();
    let mut y = cfg.start.clone();
    let mut k = 0;
    let (pending, termination) = loop {
        let Some(params) = epoch_schedule(k, cfg) else {
            break (None, Termination::LambdaUnderflow);
        };
        if params.end_step() > cfg.max_steps {
            break (Some(params), Termination::StepBudget);
        }
        let reg = RegularizedRisk::euclidean(f, params.lambda, &cfg.start);
        let start = y.clone();
        let mut inner = Vec::with_capacity(params.inner_calls);
        for j in 0..params.inner_calls {
            let req = OptimizeRequest {
                objective: &reg,
                beta: cfg.beta + params.lambda,
                domain: cfg.domain,
                start: &y,
                steps: params.half_steps,
            };
            y = run_base(&cfg.base, &req).map_err(|e| e.context(format!("epoch {k}, inner call {j}")))?;
            inner.push(y.clone());
        }
        epochs.push(EpochRecord { params, start, inner });
        k += 1;
    };
    Ok(ConvexTrace {
        beta: cfg.beta,
        start: cfg.start.clone(),
        max_steps: cfg.max_steps,
        epochs,
        pending,
        termination,
    })
}

/// Certified minimizers `x*_k` of every completed epoch's objective and the
/// unregularized `x*`, each to distance `1e-9`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMinimizers {
    pub per_epoch: Vec<OracleSolution>,
    pub unregularized: OracleSolution,
}

pub fn epoch_minimizers(
    trace: &ConvexTrace,
    risk: &EmpiricalRisk,
    cfg: &WrapperConfig,
    exec: Execution,
) -> Result<EpochMinimizers> {
    let opts = OracleOptions {
        dist_tol: Some(1e-9),
        ..OracleOptions::default()
    };
    let per_epoch = try_map_indexed(trace.epochs.len(), exec, |k| {
        risk_minimizer(risk, trace.epochs[k].params.lambda, &cfg.start, cfg.domain, &opts)
            .map_err(|e| e.context(format!("oracle for epoch {k}")))
    })?;
    let unregularized = risk_minimizer(risk, 0.0, &cfg.start, cfg.domain, &opts)
        .map_err(|e| e.context("oracle for the empirical risk"))?;
    Ok(EpochMinimizers {
        per_epoch,
        unregularized,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalvingEpoch {
    pub k: usize,
    /// `F^{(λ_k)}(y_{k+1}) − F^{(λ_k)}(x*_k) ≤ λ_k‖y_k − x*_k‖²/2^{m_k+1}`
    pub value: Inequality,
    /// `‖y_{k+1} − x*_k‖² ≤ ‖y_k − x*_k‖²/2^{m_k}`
    pub distance: Inequality,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalvingReport {
    pub epochs: Vec<HalvingEpoch>,
    pub slack: f64,
    pub pass: bool,
}

/// Per-epoch contraction in value and distance toward `x*_k`;
/// `minimizers[k]` is `x*_k`.
pub fn check_halving<F: Objective + ?Sized>(
    trace: &ConvexTrace,
    f: &F,
    minimizers: &[Vec<f64>],
    slack: f64,
) -> Result<HalvingReport> {
    if minimizers.len() < trace.epochs.len() {
        return Err(Error::Config("one minimizer per completed epoch is required".into()));
    }
    let epochs: Vec<HalvingEpoch> = trace
        .epochs
        .iter()
        .zip(minimizers)
        .map(|(e, xs)| {
            let p = &e.params;
            let reg = RegularizedRisk::euclidean(f, p.lambda, &trace.start);
            let d0 = dist2_sq(&e.start, xs);
            let scale = 2f64.powi(p.inner_calls as i32);
            let value = Inequality::new(reg.value(e.end()) - reg.value(xs), p.lambda * d0 / (2.0 * scale));
            let distance = Inequality::new(dist2_sq(e.end(), xs), d0 / scale);
            HalvingEpoch {
                k: p.k,
                value,
                distance,
                pass: value.holds(slack) && distance.holds(slack),
            }
        })
        .collect();
    let pass = epochs.iter().all(|e| e.pass);
    Ok(HalvingReport { epochs, slack, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryEpoch {
    pub k: usize,
    /// `‖y_k − x*_k‖ ≤ ‖x_0 − x*_k‖`
    pub start_distance: Inequality,
    /// `‖x_0 − x*_k‖² + ‖x*_k − x*‖² ≤ ‖x_0 − x*‖²`
    pub path: Inequality,
    /// `F(y_{k+1}) − F* ≤ 3λ_k‖x_0 − x*‖²/4`
    pub gap: Inequality,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub epochs: Vec<GeometryEpoch>,
    pub slack: f64,
    pub pass: bool,
}

/// Distance and gap relations between the epoch outputs, the regularized
/// minimizers `x*_k` and the unregularized minimizer `x*`.
pub fn check_epoch_geometry<F: Objective + ?Sized>(
    trace: &ConvexTrace,
    f: &F,
    minimizers: &[Vec<f64>],
    x_star: &[f64],
    slack: f64,
) -> Result<GeometryReport> {
    if minimizers.len() < trace.epochs.len() {
        return Err(Error::Config("one minimizer per completed epoch is required".into()));
    }
    let x0 = &trace.start;
    let d2 = dist2_sq(x0, x_star);
    let f_star = f.value(x_star);
    let epochs: Vec<GeometryEpoch> = trace
        .epochs
        .iter()
        .zip(minimizers)
        .map(|(e, xs)| {
            let start_distance = Inequality::new(dist2_sq(&e.start, xs).sqrt(), dist2_sq(x0, xs).sqrt());
            let path = Inequality::new(dist2_sq(x0, xs) + dist2_sq(xs, x_star), d2);
            let gap = Inequality::new(f.value(e.end()) - f_star, 0.75 * e.params.lambda * d2);
            GeometryEpoch {
                k: e.params.k,
                start_distance,
                path,
                gap,
                pass: start_distance.holds(slack) && path.holds(slack) && gap.holds(slack),
            }
        })
        .collect();
    let pass = epochs.iter().all(|e| e.pass);
    Ok(GeometryReport { epochs, slack, pass })
}

/// `‖x₁ − x₂‖² ≤ ((λ₁ − λ₂)/(λ₁ + λ₂))(‖x₂ − x₀‖² − ‖x₁ − x₀‖²)` for the
/// minimizers `x₁, x₂` of `f + (λᵢ/2)‖x − x₀‖²`, `λ₁ > 0`, `λ₂ ≥ 0`.
pub fn regularization_path_inequality(x1: &[f64], x2: &[f64], x0: &[f64], l1: f64, l2: f64) -> Inequality {
    Inequality::new(
        dist2_sq(x1, x2),
        (l1 - l2) / (l1 + l2) * (dist2_sq(x2, x0) - dist2_sq(x1, x0)),
    )
}

/// `‖x₀ − x*_λ‖² + ‖x*_λ − x*‖² ≤ ‖x₀ − x*‖²`.
pub fn anchor_path_inequality(x0: &[f64], x_lambda: &[f64], x_star: &[f64]) -> Inequality {
    Inequality::new(
        dist2_sq(x0, x_lambda) + dist2_sq(x_lambda, x_star),
        dist2_sq(x0, x_star),
    )
}

/// `‖x₂ − x₁‖ ≤ (2/μ)‖∇h(x₁)‖_*` for minimizers `x₁` of `f₁` and `x₂` of the
/// μ-strongly convex `f₂ = f₁ + h`.
pub fn minimizer_shift_inequality(x1: &[f64], x2: &[f64], grad_h_at_x1: &[f64], mu: f64, dual: NormSpec) -> Inequality {
    Inequality::new(
        crate::vecspace::norm(&crate::vecspace::sub(x2, x1), dual.dual()),
        2.0 / mu * crate::vecspace::norm(grad_h_at_x1, dual),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{LossKind, LossModel, Quadratic, SyntheticSpec};

    fn cfg(beta: f64, c: f64, gamma: f64, d: f64, n: usize, g: f64) -> WrapperConfig {
        WrapperConfig {
            base: BaseOptimizer::nag().with_rate(c, gamma),
            beta,
            lipschitz: g,
            dist_bound: d,
            n,
            start: vec![0.0],
            max_steps: 1000,
            domain: DomainSpec::Unconstrained,
        }
    }

    #[test]
    fn schedule_example() {
        let c = cfg(1.0, 2.0, 2.0, 1.0, 100, 1.0);
        let p = epoch_schedule(0, &c).unwrap();
        assert_eq!(p.lambda, 0.25);
        assert_eq!(p.inner_calls, 10);
        assert_eq!(p.half_steps, 7);
        assert_eq!(p.start_step, 0);
        let p1 = epoch_schedule(1, &c).unwrap();
        assert_eq!(p1.lambda, p.lambda / 2.0);
        assert_eq!(p1.start_step, 70);
    }

    #[test]
    fn inner_call_floor() {
        // λ D n / G = 1
        let c = cfg(4.0, 2.0, 2.0, 1.0, 1, 1.0);
        assert_eq!(c.inner_calls(1.0), 1);
        assert_eq!(c.inner_calls(0.01), 1);
    }

    #[test]
    fn schedule_sums_and_underflow() {
        let c = cfg(3.0, 0.5, 1.0, 2.0, 500, 1.5);
        let s = c.schedule(80);
        assert!(s.len() < 81, "λ must underflow before epoch 80");
        let mut t = 0;
        for (k, p) in s.iter().enumerate() {
            assert_eq!(p.start_step, t);
            assert_eq!(p.lambda, 3.0 / 2f64.powi(k as i32 + 2));
            t = p.end_step();
        }
        assert!(epoch_schedule(s.len(), &c).is_none());
    }

    #[test]
    fn short_budget_keeps_start() {
        let f = Quadratic::isotropic(vec![1.0, -1.0]);
        let mut c = cfg(1.0, 2.0, 2.0, 2.0, 100, 1.0);
        c.start = vec![0.0, 0.0];
        c.max_steps = 69;
        let trace = run_stabreg_convex_on(&c, &f).unwrap();
        assert!(trace.epochs.is_empty());
        assert_eq!(trace.termination, Termination::StepBudget);
        for t in 0..=69 {
            assert_eq!(trace.x_at(t), &[0.0, 0.0]);
        }
    }

    #[test]
    fn x_is_piecewise_constant() {
        let f = Quadratic::new(vec![1.0, 0.3], vec![1.0, -2.0]);
        let mut c = cfg(1.0, 2.0, 2.0, 3.0, 50, 1.0);
        c.start = vec![0.0, 0.0];
        c.max_steps = 600;
        let trace = run_stabreg_convex_on(&c, &f).unwrap();
        assert!(trace.epochs.len() >= 2);
        for e in &trace.epochs {
            let p = e.params;
            for t in p.start_step..p.end_step() {
                assert_eq!(trace.x_at(t), e.start.as_slice());
            }
            assert_eq!(e.inner.len(), p.inner_calls);
        }
        let again = run_stabreg_convex_on(&c, &f).unwrap();
        assert_eq!(trace, again);
    }

    #[test]
    fn halving_on_quadratic_and_falsified_rate() {
        // κ = 100 quadratic: plain GD needs the true constant to halve
        let f = Quadratic::new(vec![1.0, 0.01], vec![3.0, -4.0]);
        let mut c = WrapperConfig {
            base: BaseOptimizer::gd(),
            beta: 1.0,
            lipschitz: 1.0,
            dist_bound: 5.0,
            n: 100,
            start: vec![0.0, 0.0],
            max_steps: 20_000,
            domain: DomainSpec::Unconstrained,
        };
        let run = |c: &WrapperConfig| {
            let trace = run_stabreg_convex_on(c, &f).unwrap();
            let xs: Vec<Vec<f64>> = trace
                .epochs
                .iter()
                .map(|e| f.regularized_minimizer(e.params.lambda, &c.start))
                .collect();
            check_halving(&trace, &f, &xs, 1e-6).unwrap()
        };
        let good = run(&c);
        assert!(!good.epochs.is_empty());
        assert!(good.pass, "{good:?}");
        c.base = c.base.with_rate(0.05, 1.0);
        let bad = run(&c);
        assert!(!bad.pass);
    }

    #[test]
    fn empty_trace_is_vacuous() {
        let f = Quadratic::isotropic(vec![1.0]);
        let mut c = cfg(1.0, 2.0, 2.0, 1.0, 100, 1.0);
        c.max_steps = 0;
        let trace = run_stabreg_convex_on(&c, &f).unwrap();
        assert!(check_halving(&trace, &f, &[], 1e-6).unwrap().pass);
        assert!(check_epoch_geometry(&trace, &f, &[], &[1.0], 1e-6).unwrap().pass);
    }

    #[test]
    fn regularization_path_example() {
        // f = ½(x−1)², x0 = 0: minimizers 0.5 (λ=1) and 1 (λ=0)
        let ineq = regularization_path_inequality(&[0.5], &[1.0], &[0.0], 1.0, 0.0);
        assert_eq!(ineq.lhs, 0.25);
        assert_eq!(ineq.rhs, 0.75);
        assert!(ineq.holds(0.0));
    }

    #[test]
    fn logistic_run_passes_epoch_checks() {
        let data = SyntheticSpec::classification(17, 200, 5, 1.0, NormSpec::L2)
            .generate()
            .unwrap();
        let loss = LossModel::for_feature_bound(LossKind::Logistic, NormSpec::L2, 1.0).unwrap();
        let risk = EmpiricalRisk::new(data, loss).unwrap();
        let c = WrapperConfig::for_risk(
            BaseOptimizer::nag(),
            &risk,
            5.0,
            vec![0.0; 5],
            500,
            DomainSpec::Unconstrained,
        );
        let trace = run_stabreg_convex(&c, &risk).unwrap();
        let mins = epoch_minimizers(&trace, &risk, &c, Execution::Parallel).unwrap();
        let xs: Vec<Vec<f64>> = mins.per_epoch.iter().map(|s| s.x.clone()).collect();
        let halving = check_halving(&trace, &risk, &xs, 1e-6).unwrap();
        assert!(halving.pass, "{halving:?}");
        let geo = check_epoch_geometry(&trace, &risk, &xs, &mins.unregularized.x, 1e-6).unwrap();
        assert!(geo.pass, "{geo:?}");
    }

    #[test]
    fn rejects_non_euclidean_input() {
        let data = SyntheticSpec::classification(1, 10, 3, 1.0, NormSpec::L1)
            .generate()
            .unwrap();
        let loss = LossModel::certified(LossKind::Logistic, &data).unwrap();
        let risk = EmpiricalRisk::new(data, loss).unwrap();
        let c = WrapperConfig::for_risk(
            BaseOptimizer::nag(),
            &risk,
            1.0,
            vec![0.0; 3],
            10,
            DomainSpec::Unconstrained,
        );
        assert!(matches!(run_stabreg_convex(&c, &risk), Err(Error::Config(_))));
        let mut c2 = c.clone();
        c2.dist_bound = 0.0;
        assert!(c2.validate().is_err());
    }
}
