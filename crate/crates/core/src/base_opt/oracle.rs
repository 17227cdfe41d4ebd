use serde::{Deserialize, Serialize};

use crate::mirror::MirrorMap;
use crate::objectives::Objective;
use crate::objectives::{EmpiricalRisk, RegularizedRisk};
use crate::tolerances;
use crate::vecspace::{dot, is_finite, norm2, project, stationarity_residual, sub, DomainSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOptions {
    /// Required certified objective gap.
    pub tol: f64,
    /// Optional certified bound on the distance to the minimizer.
    pub dist_tol: Option<f64>,
    pub max_iters: usize,
    /// Initial smoothness guess for backtracking.
    pub smoothness: Option<f64>,
    pub start: Option<Vec<f64>>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: tolerances::ORACLE_GAP,
            dist_tol: None,
            max_iters: 200_000,
            smoothness: None,
            start: None,
        }
    }
}

impl OracleOptions {
    pub fn with_tol(tol: f64) -> Self {
        OracleOptions {
            tol,
            ..OracleOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Certified upper bound on `f(x) − min f`.
    pub gap_bound: f64,
    /// Certified upper bound on `‖x − argmin f‖₂`.
    pub dist_bound: f64,
    pub iterations: usize,
}

/// The certificate that is still short of its tolerance, gap first.
fn shortfall(gap_bound: f64, dist_bound: f64, opts: &OracleOptions) -> (f64, f64) {
    match opts.dist_tol {
        Some(t) if gap_bound <= opts.tol => (dist_bound, t),
        _ => (gap_bound, opts.tol),
    }
}

/// Certified minimizer of a `mu`-strongly convex (ℓ2) smooth objective on
/// `domain`.
///
/// Runs projected accelerated gradient with backtracking and gradient-based
/// restarts. A step `x⁺ = Π(y − ∇f(y)/L)` accepted by the descent test gives
/// `f(x⁺) − f* ≤ ‖L(y − x⁺)‖²/(2μ)`; independently, the stationarity
/// residual `ρ` at `x⁺` gives `‖x⁺ − x*‖ ≤ ρ/μ` and `f(x⁺) − f* ≤ ρ²/(2μ)`
/// without any function-value cancellation.
pub fn oracle_minimize<F: Objective + ?Sized>(
    f: &F,
    domain: DomainSpec,
    mu: f64,
    opts: &OracleOptions,
) -> Result<OracleSolution> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Config(format!(
            "oracle needs a positive strong-convexity modulus, got {mu}"
        )));
    }
    let d = f.dim();
    let start = match &opts.start {
        Some(s) => s.clone(),
        None if domain == DomainSpec::Simplex => vec![1.0 / d as f64; d],
        None => vec![0.0; d],
    };
    let mut x = project(&start, domain)?;
    let mut y = x.clone();
    let mut theta = 1.0_f64;
    let mut lip = opts.smoothness.unwrap_or(1.0);
    let (mut fy, mut gy) = f.value_and_grad(&y);
    let (mut last_bound, mut last_tol) = (f64::INFINITY, opts.tol);

    for it in 0..opts.max_iters {
        if !(fy.is_finite() && is_finite(&gy)) {
            return Err(Error::NonFiniteGradient { iteration: it });
        }
        let (x_new, f_new, slack) = loop {
            let v: Vec<f64> = y.iter().zip(&gy).map(|(a, b)| a - b / lip).collect();
            let cand = project(&v, domain)?;
            let diff = sub(&cand, &y);
            let fc = f.value(&cand);
            let slack = 16.0 * f64::EPSILON * (fy.abs() + fc.abs());
            if fc <= fy + dot(&gy, &diff) + 0.5 * lip * dot(&diff, &diff) + slack {
                break (cand, fc, slack);
            }
            lip *= 2.0;
            if !lip.is_finite() {
                return Err(Error::OracleFailure {
                    gap_bound: last_bound,
                    tol: last_tol,
                    iterations: it,
                });
            }
        };
        let mapping = lip * norm2(&sub(&y, &x_new));
        let residual = stationarity_residual(domain, &x_new, &f.gradient(&x_new));
        let gap_bound = (mapping * mapping / (2.0 * mu) + slack).min(residual * residual / (2.0 * mu));
        let dist_bound = (residual / mu).min((2.0 * gap_bound / mu).sqrt());
        (last_bound, last_tol) = shortfall(gap_bound, dist_bound, opts);
        if gap_bound <= opts.tol && opts.dist_tol.is_none_or(|t| dist_bound <= t) {
            return Ok(OracleSolution {
                x: x_new,
                value: f_new,
                gap_bound,
                dist_bound,
                iterations: it,
            });
        }

        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let restart = dot(&sub(&y, &x_new), &sub(&x_new, &x)) > 0.0;
        if restart {
            theta = 1.0;
            y = x_new.clone();
        } else {
            let m = (theta - 1.0) / theta_next;
            y = x_new.iter().zip(&x).map(|(a, b)| a + m * (a - b)).collect();
            if !domain.contains(&y) {
                y = project(&y, domain)?;
            }
            theta = theta_next;
        }
        x = x_new;
        lip *= 0.95;
        (fy, gy) = f.value_and_grad(&y);
    }
    Err(Error::OracleFailure {
        gap_bound: last_bound,
        tol: last_tol,
        iterations: opts.max_iters,
    })
}

/// Certified minimizer of `f + λR` on the mirror map's domain, for convex
/// smooth `f` and `λ > 0`.
///
/// Iterates regularized mirror steps with a backtracked relative smoothness
/// constant. The gap is certified by the lower bound
/// `min_X f(x̂) + ∇f(x̂)·(x − x̂) + λR(x)`, solved exactly by a Bregman
/// projection. Since `f + λR` is λ-strongly convex (in ℓ2 as well as
/// relative to `R`), its stationarity residual bounds the distance to the
/// minimizer.
pub fn oracle_minimize_relative<F: Objective + ?Sized>(
    f: &F,
    mirror: &MirrorMap,
    lambda: f64,
    opts: &OracleOptions,
) -> Result<OracleSolution> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Config(format!("relative oracle needs λ > 0, got {lambda}")));
    }
    let d = f.dim();
    let mut x = match &opts.start {
        Some(s) => s.clone(),
        None => mirror.center(d),
    };
    let mut lip = opts.smoothness.unwrap_or(1.0);
    let (mut last_bound, mut last_tol) = (f64::INFINITY, opts.tol);
    for it in 0..opts.max_iters {
        let (fx, gx) = f.value_and_grad(&x);
        if !(fx.is_finite() && is_finite(&gx)) {
            return Err(Error::NonFiniteGradient { iteration: it });
        }
        let y: Vec<f64> = gx.iter().map(|g| -g / lambda).collect();
        let tilde = mirror.bregman_project(&y)?;
        let lower = fx + dot(&gx, &sub(&tilde, &x)) + lambda * mirror.value(&tilde);
        let upper = fx + lambda * mirror.value(&x);
        let grad_h: Vec<f64> = gx
            .iter()
            .zip(mirror.grad_clamped(&x))
            .map(|(a, b)| a + lambda * b)
            .collect();
        let residual = stationarity_residual(mirror.domain, &x, &grad_h);
        let gap_bound = ((upper - lower).max(0.0) + 16.0 * f64::EPSILON * (upper.abs() + lower.abs()))
            .min(residual * residual / (2.0 * lambda));
        let dist_bound = (residual / lambda).min((2.0 * gap_bound / lambda).sqrt());
        (last_bound, last_tol) = shortfall(gap_bound, dist_bound, opts);
        if gap_bound <= opts.tol && opts.dist_tol.is_none_or(|t| dist_bound <= t) {
            return Ok(OracleSolution {
                x,
                value: upper,
                gap_bound,
                dist_bound,
                iterations: it,
            });
        }
        x = loop {
            let cand = mirror.mirror_step(&x, &gx, lip, lambda)?;
            let fc = f.value(&cand);
            let slack = 16.0 * f64::EPSILON * (fx.abs() + fc.abs());
            if fc <= fx + dot(&gx, &sub(&cand, &x)) + lip * mirror.bregman(&cand, &x)? + slack {
                break cand;
            }
            lip *= 2.0;
            if !lip.is_finite() {
                return Err(Error::OracleFailure {
                    gap_bound: last_bound,
                    tol: last_tol,
                    iterations: it,
                });
            }
        };
        lip *= 0.9;
    }
    Err(Error::OracleFailure {
        gap_bound: last_bound,
        tol: last_tol,
        iterations: opts.max_iters,
    })
}

/// Certified minimizer of `F_S + (λ/2)‖x − anchor‖²` over `domain`, `λ ≥ 0`.
///
/// On a bounded domain the strong-convexity modulus is `λ` plus the data
/// curvature over the domain. Without constraints the problem is solved on
/// growing Euclidean balls until the certified solution is interior, which
/// makes it the unconstrained minimizer.
pub fn risk_minimizer(
    risk: &EmpiricalRisk,
    lambda: f64,
    anchor: &[f64],
    domain: DomainSpec,
    opts: &OracleOptions,
) -> Result<OracleSolution> {
    let f = RegularizedRisk::euclidean(risk, lambda, anchor);
    let beta = risk.loss().beta;
    let modulus = |dom: DomainSpec| lambda + risk.strong_convexity_on_domain(dom).unwrap_or(0.0);
    let with_hint = |start: Option<Vec<f64>>| OracleOptions {
        smoothness: opts.smoothness.or(Some(beta + lambda)),
        start: start.or_else(|| opts.start.clone()),
        ..opts.clone()
    };
    if domain.is_bounded() {
        let mu = modulus(domain);
        if !(mu > 0.0) {
            return Err(Error::Config("objective is not strongly convex on the domain".into()));
        }
        return oracle_minimize(&f, domain, mu, &with_hint(None));
    }
    let mut radius = 1.0 + 2.0 * norm2(anchor);
    let mut start = None;
    for _ in 0..40 {
        let ball = DomainSpec::L2Ball { radius };
        let mu = modulus(ball);
        if mu > 0.0 {
            let sol = oracle_minimize(&f, ball, mu, &with_hint(start.clone()))?;
            if norm2(&sol.x) + sol.dist_bound < radius * (1.0 - 1e-9) {
                return Ok(sol);
            }
            start = Some(sol.x);
        }
        radius *= 2.0;
    }
    Err(Error::Config("could not bound the unconstrained minimizer".into()))
}
