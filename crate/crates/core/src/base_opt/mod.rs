//! Base first-order optimizers with declared convergence rates, and
//! certified high-precision minimizers used as ground truth.

mod oracle;

pub use oracle::{oracle_minimize, oracle_minimize_relative, risk_minimizer, OracleOptions, OracleSolution};

use serde::{Deserialize, Serialize};

use crate::mirror::{MirrorKind, MirrorMap};
use crate::objectives::Objective;
use crate::vecspace::{is_finite, project, DomainSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BaseKind {
    /// Projected gradient descent with step `1/β`.
    Gd,
    /// Projected Nesterov acceleration (FISTA momentum) with step `1/β`.
    Nag,
    /// Mirror descent with coefficient `β`.
    Md { map: MirrorKind },
}

/// A base algorithm `A(f, β, x_0, t)` with a declared guarantee
/// `f(x_t) − f* ≤ C β ‖x_0 − x*‖² / t^γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseOptimizer {
    pub kind: BaseKind,
    pub rate_c: f64,
    pub rate_gamma: f64,
}

impl BaseOptimizer {
    pub fn gd() -> Self {
        BaseOptimizer {
            kind: BaseKind::Gd,
            rate_c: 0.5,
            rate_gamma: 1.0,
        }
    }

    pub fn nag() -> Self {
        BaseOptimizer {
            kind: BaseKind::Nag,
            rate_c: 2.0,
            rate_gamma: 2.0,
        }
    }

    pub fn md(map: MirrorKind) -> Self {
        BaseOptimizer {
            kind: BaseKind::Md { map },
            rate_c: 1.0,
            rate_gamma: 1.0,
        }
    }

    /// Same algorithm, different declared constants.
    pub fn with_rate(self, rate_c: f64, rate_gamma: f64) -> Self {
        BaseOptimizer {
            rate_c,
            rate_gamma,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate_c.is_finite() && self.rate_c > 0.0) {
            return Err(Error::Config(format!(
                "rate constant C must be positive, got {}",
                self.rate_c
            )));
        }
        if !(self.rate_gamma > 0.0 && self.rate_gamma <= 2.0) {
            return Err(Error::Config(format!(
                "rate exponent γ must lie in (0, 2], got {}",
                self.rate_gamma
            )));
        }
        Ok(())
    }

    /// `C β D² / t^γ`.
    pub fn rate_bound(&self, beta: f64, dist_sq: f64, t: usize) -> f64 {
        self.rate_c * beta * dist_sq / (t as f64).powf(self.rate_gamma)
    }
}

/// One call `A(f, β, x_0, t)`.
pub struct OptimizeRequest<'a> {
    pub objective: &'a dyn Objective,
    /// Smoothness handed to the optimizer (sets the step size).
    pub beta: f64,
    pub domain: DomainSpec,
    pub start: &'a [f64],
    pub steps: usize,
}

/// Returns `x_t` for `t = req.steps`.
pub fn run_base(opt: &BaseOptimizer, req: &OptimizeRequest<'_>) -> Result<Vec<f64>> {
    run_base_traced(opt, req, |_, _| {})
}

/// Like [`run_base`], calling `observe(t, x_t)` for `t = 0..=steps`.
pub fn run_base_traced(
    opt: &BaseOptimizer,
    req: &OptimizeRequest<'_>,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<Vec<f64>> {
    if !(req.beta.is_finite() && req.beta > 0.0) {
        return Err(Error::Config(format!(
            "step smoothness must be positive, got {}",
            req.beta
        )));
    }
    if req.start.len() != req.objective.dim() {
        return Err(Error::Config(format!(
            "start has dimension {}, objective {}",
            req.start.len(),
            req.objective.dim()
        )));
    }
    let grad = |x: &[f64], t: usize| -> Result<Vec<f64>> {
        let g = req.objective.gradient(x);
        if is_finite(&g) {
            Ok(g)
        } else {
            Err(Error::NonFiniteGradient { iteration: t })
        }
    };
    let step = |y: &[f64], g: &[f64]| -> Result<Vec<f64>> {
        let v: Vec<f64> = y.iter().zip(g).map(|(a, b)| a - b / req.beta).collect();
        project(&v, req.domain)
    };

    let mut x = req.start.to_vec();
    observe(0, &x);
    match opt.kind {
        BaseKind::Gd => {
            for t in 0..req.steps {
                let g = grad(&x, t)?;
                x = step(&x, &g)?;
                observe(t + 1, &x);
            }
        }
        BaseKind::Nag => {
            let mut y = x.clone();
            let mut theta = 1.0_f64;
            for t in 0..req.steps {
                let g = grad(&y, t)?;
                let next = step(&y, &g)?;
                let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
                let momentum = (theta - 1.0) / theta_next;
                y = next.iter().zip(&x).map(|(a, b)| a + momentum * (a - b)).collect();
                x = next;
                theta = theta_next;
                observe(t + 1, &x);
            }
        }
        BaseKind::Md { map } => {
            let mirror = MirrorMap::new(map, req.domain)?;
            for t in 0..req.steps {
                let g = grad(&x, t)?;
                x = mirror
                    .mirror_step(&x, &g, req.beta, 0.0)
                    .map_err(|e| e.context(format!("mirror step {t}")))?;
                observe(t + 1, &x);
            }
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{EmpiricalRisk, LossKind, LossModel, Quadratic, SyntheticSpec};
    use crate::vecspace::{dist2_sq, NormSpec};

    fn half_square() -> Quadratic {
        Quadratic::isotropic(vec![0.0])
    }

    #[test]
    fn single_step_examples() {
        let f = half_square();
        for opt in [BaseOptimizer::gd(), BaseOptimizer::nag()] {
            let req = OptimizeRequest {
                objective: &f,
                beta: 1.0,
                domain: DomainSpec::Unconstrained,
                start: &[1.0],
                steps: 1,
            };
            assert_eq!(run_base(&opt, &req).unwrap(), vec![0.0]);
            let req = OptimizeRequest { steps: 0, ..req };
            assert_eq!(run_base(&opt, &req).unwrap(), vec![1.0]);
        }
    }

    #[test]
    fn non_finite_gradient_reports_iteration() {
        struct Bad;
        impl Objective for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, _: &[f64]) -> f64 {
                0.0
            }
            fn value_and_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
                (0.0, vec![if x[0] < 0.5 { f64::NAN } else { 1.0 }])
            }
        }
        let req = OptimizeRequest {
            objective: &Bad,
            beta: 1.0,
            domain: DomainSpec::Unconstrained,
            start: &[1.0],
            steps: 5,
        };
        assert!(matches!(
            run_base(&BaseOptimizer::gd(), &req),
            Err(Error::NonFiniteGradient { iteration: 1 })
        ));
    }

    #[test]
    fn euclidean_md_matches_projected_gd() {
        let f = Quadratic::new(vec![1.0, 3.0], vec![2.0, -1.0]);
        let dom = DomainSpec::L2Ball { radius: 1.0 };
        let req = OptimizeRequest {
            objective: &f,
            beta: 3.0,
            domain: dom,
            start: &[0.0, 0.0],
            steps: 25,
        };
        let a = run_base(&BaseOptimizer::gd(), &req).unwrap();
        let b = run_base(&BaseOptimizer::md(MirrorKind::SquaredL2), &req).unwrap();
        assert!(dist2_sq(&a, &b) < 1e-24);
    }

    #[test]
    fn rate_validate_rejects_bad_constants() {
        assert!(BaseOptimizer::gd().with_rate(0.0, 1.0).validate().is_err());
        assert!(BaseOptimizer::gd().with_rate(1.0, 2.5).validate().is_err());
        assert!(BaseOptimizer::nag().validate().is_ok());
    }

    /// Declared rates hold at every `t ≤ 1000` on random logistic problems.
    #[test]
    fn declared_rates_hold_on_logistic_problems() {
        for seed in 0..5u64 {
            let data = SyntheticSpec::classification(100 + seed, 60, 4, 1.0, NormSpec::L2)
                .generate()
                .unwrap();
            let loss = LossModel::certified(LossKind::Logistic, &data).unwrap();
            let beta = loss.beta;
            let risk = EmpiricalRisk::new(data, loss).unwrap();
            let dom = DomainSpec::L2Ball { radius: 4.0 };
            let mu = risk.strong_convexity_on_domain(dom).unwrap();
            let star = oracle_minimize(&risk, dom, mu, &OracleOptions::default()).unwrap();
            let start = vec![1.5, -1.5, 1.5, -1.5];
            let d2 = dist2_sq(&start, &star.x);
            for opt in [BaseOptimizer::gd(), BaseOptimizer::nag()] {
                let req = OptimizeRequest {
                    objective: &risk,
                    beta,
                    domain: dom,
                    start: &start,
                    steps: 1000,
                };
                let mut worst = f64::NEG_INFINITY;
                run_base_traced(&opt, &req, |t, x| {
                    if t > 0 {
                        let gap = risk.value(x) - star.value;
                        worst = worst.max(gap / opt.rate_bound(beta, d2, t));
                    }
                })
                .unwrap();
                assert!(worst <= 1.05, "{:?} seed {seed}: ratio {worst}", opt.kind);
            }
        }
    }
}
