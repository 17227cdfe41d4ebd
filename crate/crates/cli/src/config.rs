use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stabreg::base_opt::BaseOptimizer;
use stabreg::harness::{AlgorithmSpec, ProblemSpec, TheoryBands};
use stabreg::mirror::{MirrorKind, MirrorMap};
use stabreg::objectives::{LabelModel, LossKind, SyntheticSpec};
use stabreg::vecspace::{DomainSpec, NormSpec};

use crate::UsageError;

/// Everything a command needs, read from one TOML file and then patched by
/// command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seeds data generation, stability trials and lemma checks.
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub problem: ProblemConfig,
    pub algorithm: AlgorithmConfig,
    pub harness: HarnessConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub loss: LossKind,
    pub n: usize,
    pub d: usize,
    pub feature_bound: f64,
    /// Defaults to the norm of the mirror map, or ℓ2 for the epoch wrapper.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<NormSpec>,
    pub planted_norm: f64,
    pub labels: LabelModel,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            loss: LossKind::Logistic,
            n: 200,
            d: 5,
            feature_bound: 1.0,
            geometry: None,
            planted_norm: 2.0,
            labels: LabelModel::Classification,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Convex,
    Mirror,
    /// Data-independent baseline for the stability estimator.
    Constant,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseName {
    Gd,
    #[default]
    Nag,
    /// Mirror descent with [`AlgorithmConfig::mirror`].
    Md,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorName {
    SquaredL2,
    SquaredLp,
    #[default]
    Entropy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// Which algorithm `stability` and `sweep` evaluate.
    pub method: Method,
    pub base: BaseName,
    /// Declared rate `C β D² / t^γ` of the base optimizer; defaults per base.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_gamma: Option<f64>,
    pub mirror: MirrorName,
    /// Exponent of the ℓp map.
    pub p: f64,
    /// Defaults to unconstrained for the wrapper and to the map's natural
    /// domain (unit ball or simplex) for mirror descent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    /// `D`; defaults to what the domain implies when it is bounded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist_bound: Option<f64>,
    /// `T_max` for the wrapper, `T` for mirror descent.
    pub steps: usize,
    /// Overrides the default regularization of mirror descent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig {
            method: Method::Convex,
            base: BaseName::Nag,
            rate_c: None,
            rate_gamma: None,
            mirror: MirrorName::Entropy,
            p: 1.5,
            domain: None,
            dist_bound: None,
            steps: 1000,
            lambda: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub trials: usize,
    pub pool_size: usize,
    /// Steps `t` (wrapper) or horizons `T` (mirror descent) to evaluate.
    pub checkpoints: Vec<usize>,
    /// Sample sizes for `sweep`.
    pub ns: Vec<usize>,
    /// Exponent of the theory curve; defaults to the base rate's `γ` for the
    /// wrapper and to 1 for mirror descent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub bands: TheoryBands,
    /// Dimensions for `verify`.
    pub sizes: Vec<usize>,
    pub cases: usize,
    pub sabotage: bool,
    /// Completed epochs skipped before fitting the convergence slope.
    pub burn_in_epochs: usize,
    /// Mirror-descent steps below this share of `T` are left out of the
    /// slope fit.
    pub skip_fraction: f64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            trials: 20,
            pool_size: 500,
            checkpoints: vec![50, 100, 200, 400, 800],
            ns: vec![100, 200, 400],
            gamma: None,
            bands: TheoryBands::default(),
            sizes: vec![2, 5, 20],
            cases: 6,
            sabotage: false,
            burn_in_epochs: 2,
            skip_fraction: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| UsageError(format!("invalid config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn base(&self) -> Result<BaseOptimizer, UsageError> {
        let a = &self.algorithm;
        let base = match a.base {
            BaseName::Gd => BaseOptimizer::gd(),
            BaseName::Nag => BaseOptimizer::nag(),
            BaseName::Md => BaseOptimizer::md(self.mirror_kind()),
        };
        let base = base.with_rate(a.rate_c.unwrap_or(base.rate_c), a.rate_gamma.unwrap_or(base.rate_gamma));
        base.validate().map_err(usage)?;
        Ok(base)
    }

    fn mirror_kind(&self) -> MirrorKind {
        match self.algorithm.mirror {
            MirrorName::SquaredL2 => MirrorKind::SquaredL2,
            MirrorName::SquaredLp => MirrorKind::SquaredLp { p: self.algorithm.p },
            MirrorName::Entropy => MirrorKind::NegativeEntropy,
        }
    }

    pub fn mirror(&self) -> Result<MirrorMap, UsageError> {
        let kind = self.mirror_kind();
        let domain = self.algorithm.domain.unwrap_or(match kind {
            MirrorKind::SquaredL2 => DomainSpec::L2Ball { radius: 1.0 },
            MirrorKind::SquaredLp { p } => DomainSpec::LpBall { p, radius: 1.0 },
            MirrorKind::NegativeEntropy => DomainSpec::Simplex,
        });
        MirrorMap::new(kind, domain).map_err(usage)
    }

    pub fn convex_domain(&self) -> DomainSpec {
        self.algorithm.domain.unwrap_or(DomainSpec::Unconstrained)
    }

    /// The data geometry: explicit, else what the method works in.
    pub fn geometry(&self, method: Method) -> Result<NormSpec, UsageError> {
        match (self.problem.geometry, method) {
            (Some(g), _) => Ok(g),
            (None, Method::Mirror) => Ok(self.mirror()?.norm()),
            (None, _) => Ok(NormSpec::L2),
        }
    }

    pub fn problem(&self, method: Method) -> Result<ProblemSpec, UsageError> {
        let p = &self.problem;
        let spec = ProblemSpec {
            loss: p.loss,
            data: SyntheticSpec {
                seed: self.seed,
                n: p.n,
                d: p.d,
                feature_bound: p.feature_bound,
                geometry: self.geometry(method)?,
                planted_norm: p.planted_norm,
                labels: p.labels,
            },
        };
        spec.validate().map_err(usage)?;
        Ok(spec)
    }

    /// `D` for the epoch wrapper started at the origin.
    pub fn convex_dist_bound(&self) -> Result<f64, UsageError> {
        let domain = self.convex_domain();
        let d = self
            .algorithm
            .dist_bound
            .or_else(|| domain.diameter())
            .ok_or_else(|| UsageError("dist_bound is required on an unconstrained domain".into()))?;
        positive("dist_bound", d)
    }

    /// `D` for mirror descent started at the center of the map.
    pub fn mirror_dist_bound(&self) -> Result<f64, UsageError> {
        let d = match self.algorithm.dist_bound {
            Some(d) => d,
            None => self
                .mirror()?
                .dist_bound(self.problem.d)
                .ok_or_else(|| UsageError("dist_bound is required on an unconstrained domain".into()))?,
        };
        positive("dist_bound", d)
    }

    pub fn algorithm_spec(&self, method: Method) -> Result<AlgorithmSpec, UsageError> {
        Ok(match method {
            Method::Convex => AlgorithmSpec::Convex {
                base: self.base()?,
                dist_bound: self.convex_dist_bound()?,
                domain: self.convex_domain(),
            },
            Method::Mirror => AlgorithmSpec::Mirror {
                mirror: self.mirror()?,
                dist_bound: self.mirror_dist_bound()?,
                lambda: self.algorithm.lambda,
            },
            Method::Constant => AlgorithmSpec::Constant {
                point: vec![0.0; self.problem.d],
            },
        })
    }

    /// Exponent of the theory curve `t^γ / n`.
    pub fn gamma(&self) -> Result<f64, UsageError> {
        match (self.harness.gamma, self.algorithm.method) {
            (Some(g), _) => Ok(g),
            (None, Method::Mirror) => Ok(1.0),
            (None, _) => Ok(self.base()?.rate_gamma),
        }
    }
}

pub fn usage(e: stabreg::Error) -> UsageError {
    UsageError(e.to_string())
}

fn positive(name: &str, v: f64) -> Result<f64, UsageError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(UsageError(format!("{name} must be positive and finite, got {v}")))
    }
}
