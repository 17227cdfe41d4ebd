//! Empirical stability estimation, convergence curves, slope fits and the
//! consolidated lemma checks.

mod convergence;
mod lemmas;
mod slope;
mod stability;

pub use convergence::{epoch_window, measure_convergence, ConvergenceCurve, CurvePoint};
pub use lemmas::{verify_all_lemmas, LemmaEntry, LemmaReport, LemmaStatus, Sabotage, VerifyOptions};
pub use slope::{fit_loglog, least_squares, SlopeFit, Window};
pub use stability::{
    estimate_stability, evaluation_pool, stability_vs_theory, StabilityEstimate, StabilitySpec, TheoryBands,
    TheoryComparison, ESTIMATE_LABEL,
};

use serde::{Deserialize, Serialize};

use crate::base_opt::BaseOptimizer;
use crate::mirror::MirrorMap;
use crate::objectives::{EmpiricalRisk, LabelModel, LossKind, LossModel, SyntheticSpec};
use crate::stabreg_convex::{run_stabreg_convex, WrapperConfig};
use crate::stabreg_rel::{run_stabreg_rel, MirrorConfig};
use crate::vecspace::DomainSpec;
use crate::{Error, Result};

/// A loss family on seeded synthetic data. Loss constants come from the
/// declared feature bound so that a sample and all of its neighbors share
/// them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub loss: LossKind,
    pub data: SyntheticSpec,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        self.loss.validate()?;
        self.data.validate()?;
        let regression = matches!(self.data.labels, LabelModel::Regression { .. });
        if self.loss.is_classification() == regression {
            return Err(Error::Config(format!(
                "loss {:?} does not match label model {:?}",
                self.loss, self.data.labels
            )));
        }
        Ok(())
    }

    pub fn loss_model(&self) -> Result<LossModel> {
        LossModel::for_feature_bound(self.loss, self.data.geometry, self.data.feature_bound)
    }

    pub fn risk(&self) -> Result<EmpiricalRisk> {
        self.validate()?;
        EmpiricalRisk::new(self.data.generate()?, self.loss_model()?)
    }

    pub fn with_n(self, n: usize) -> Self {
        ProblemSpec {
            data: SyntheticSpec { n, ..self.data },
            ..self
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        ProblemSpec {
            data: SyntheticSpec { seed, ..self.data },
            ..self
        }
    }
}

/// A deterministic training algorithm whose outputs are read at a list of
/// checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "algorithm")]
pub enum AlgorithmSpec {
    /// Ignores the data and returns `point`.
    Constant { point: Vec<f64> },
    /// The epoch wrapper around `base`, started at the origin; checkpoint
    /// `t` reads the anytime output `x_t` of a single run.
    Convex {
        base: BaseOptimizer,
        dist_bound: f64,
        domain: DomainSpec,
    },
    /// Regularized mirror descent; checkpoint `T` is a separate run with
    /// `T` steps and the `λ` that goes with it, unless `lambda` is fixed.
    Mirror {
        mirror: MirrorMap,
        dist_bound: f64,
        lambda: Option<f64>,
    },
}

impl AlgorithmSpec {
    pub fn id(&self) -> String {
        match self {
            AlgorithmSpec::Constant { .. } => "constant".into(),
            AlgorithmSpec::Convex { base, .. } => {
                let name = serde_json::to_value(base.kind)
                    .ok()
                    .and_then(|v| v["kind"].as_str().map(String::from));
                format!("stabreg_convex({})", name.unwrap_or_default())
            }
            AlgorithmSpec::Mirror { mirror, .. } => {
                let name = serde_json::to_value(mirror.kind)
                    .ok()
                    .and_then(|v| v["kind"].as_str().map(String::from));
                format!("stabreg_rel({})", name.unwrap_or_default())
            }
        }
    }

    /// The algorithm's output on `risk` at every checkpoint.
    pub fn outputs(&self, risk: &EmpiricalRisk, checkpoints: &[usize]) -> Result<Vec<Vec<f64>>> {
        let d = risk.dataset().dim();
        match self {
            AlgorithmSpec::Constant { point } => {
                if point.len() != d {
                    return Err(Error::Config(format!(
                        "constant point has dimension {}, data {d}",
                        point.len()
                    )));
                }
                Ok(vec![point.clone(); checkpoints.len()])
            }
            AlgorithmSpec::Convex {
                base,
                dist_bound,
                domain,
            } => {
                let horizon = checkpoints.iter().copied().max().unwrap_or(0);
                let cfg = WrapperConfig::for_risk(*base, risk, *dist_bound, vec![0.0; d], horizon, *domain);
                let trace = run_stabreg_convex(&cfg, risk)?;
                Ok(checkpoints.iter().map(|&t| trace.x_at(t).to_vec()).collect())
            }
            AlgorithmSpec::Mirror {
                mirror,
                dist_bound,
                lambda,
            } => checkpoints
                .iter()
                .map(|&t| {
                    let mut cfg = MirrorConfig::for_risk(*mirror, risk, *dist_bound, t);
                    if let Some(l) = lambda {
                        cfg = cfg.with_lambda(*l);
                    }
                    Ok(run_stabreg_rel(&cfg, risk)?.final_iterate().to_vec())
                })
                .collect(),
        }
    }
}
