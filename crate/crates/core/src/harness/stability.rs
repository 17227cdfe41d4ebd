//! Sampled lower bounds on uniform stability.
//!
//! A trial draws a sample `S`, replaces one example to get `S'`, runs the
//! algorithm on both and records `max_z |ℓ(A(S); z) − ℓ(A(S'); z)|` over a
//! fixed evaluation pool. The estimate is the maximum over trials. Trials
//! and pool points are keyed by index, so a longer run only adds terms.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::slope::least_squares;
use super::{AlgorithmSpec, ProblemSpec};
use crate::objectives::{make_neighbor, stream, Example, LabelModel, SyntheticSpec};
use crate::par::{try_map_indexed, Execution};
use crate::vecspace::{dot, norm, NormSpec};
use crate::{Error, Result};

/// How reports describe `ε̂`: it never exceeds the true supremum.
pub const ESTIMATE_LABEL: &str = "estimate (lower bound)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySpec {
    pub problem: ProblemSpec,
    pub algorithm: AlgorithmSpec,
    pub checkpoints: Vec<usize>,
    pub trials: usize,
    pub pool_size: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub algorithm: String,
    pub t: usize,
    pub n: usize,
    pub trials: usize,
    pub pool_size: usize,
    pub estimate: f64,
    pub per_trial: Vec<f64>,
    pub seed: u64,
    pub label: String,
}

// stream ids; trials and pool points each get their own block
const POOL_STREAM: u64 = 1 << 40;
const TRIAL_STREAM: u64 = 2 << 40;

/// The first `size` points of the evaluation pool for `data`. Even
/// positions are extreme feature vectors (coordinate poles `±B e_j` for ℓ2
/// and ℓp geometry, random cube corners for ℓ1 geometry), odd positions are
/// fresh draws from the data distribution.
pub fn evaluation_pool(data: &SyntheticSpec, seed: u64, size: usize) -> Vec<Example> {
    let planted = data.planted();
    (0..size)
        .map(|j| {
            let mut rng = stream(seed, POOL_STREAM + j as u64);
            if j % 2 == 1 {
                data.draw(&planted, &mut rng)
            } else {
                extreme_example(data, &planted, j / 2, &mut rng)
            }
        })
        .collect()
}

fn extreme_example<R: Rng>(data: &SyntheticSpec, planted: &[f64], k: usize, rng: &mut R) -> Example {
    let (d, b) = (data.d, data.feature_bound);
    let features = match data.geometry {
        NormSpec::L1 => (0..d).map(|_| if rng.random::<bool>() { b } else { -b }).collect(),
        _ if k < 2 * d => {
            let mut a = vec![0.0; d];
            a[k / 2] = if k.is_multiple_of(2) { b } else { -b };
            a
        }
        _ => {
            let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let n = norm(&g, NormSpec::L2).max(f64::MIN_POSITIVE);
            g.iter().map(|v| v * b / n).collect()
        }
    };
    let label = match data.labels {
        LabelModel::Classification => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
        LabelModel::Regression { noise_scale } => {
            let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
            dot(&features, planted) + noise_scale * (u / (1.0 - u)).ln()
        }
    };
    Example::new(features, label)
}

/// Per-checkpoint stability estimates, trials run through `exec`.
pub fn estimate_stability(spec: &StabilitySpec, exec: Execution) -> Result<Vec<StabilityEstimate>> {
    if spec.trials == 0 {
        return Err(Error::Config("at least one trial is required".into()));
    }
    if spec.pool_size == 0 {
        return Err(Error::Config("the evaluation pool must be nonempty".into()));
    }
    spec.problem.validate()?;
    let pool = evaluation_pool(&spec.problem.data, spec.seed, spec.pool_size);
    let per_trial = try_map_indexed(spec.trials, exec, |i| {
        run_trial(spec, &pool, i).map_err(|e| e.context(format!("stability trial {i}")))
    })?;
    Ok(spec
        .checkpoints
        .iter()
        .enumerate()
        .map(|(c, &t)| {
            let values: Vec<f64> = per_trial.iter().map(|v| v[c]).collect();
            StabilityEstimate {
                algorithm: spec.algorithm.id(),
                t,
                n: spec.problem.data.n,
                trials: spec.trials,
                pool_size: spec.pool_size,
                estimate: values.iter().cloned().fold(0.0, f64::max),
                per_trial: values,
                seed: spec.seed,
                label: ESTIMATE_LABEL.into(),
            }
        })
        .collect())
}

/// Loss differences at every checkpoint for trial `i`.
fn run_trial(spec: &StabilitySpec, pool: &[Example], i: usize) -> Result<Vec<f64>> {
    let mut rng = stream(spec.seed, TRIAL_STREAM + i as u64);
    let problem = spec.problem.with_seed(rng.random());
    let risk = problem.risk()?;
    let index = rng.random_range(0..risk.n());
    let replacement = extreme_example(
        &problem.data,
        &problem.data.planted(),
        rng.random_range(0..2 * problem.data.d),
        &mut rng,
    );
    let neighbor = make_neighbor(risk.dataset(), index, replacement)?;
    let risk_neighbor = crate::objectives::EmpiricalRisk::new(neighbor, *risk.loss())?;
    let a = spec.algorithm.outputs(&risk, &spec.checkpoints)?;
    let b = spec.algorithm.outputs(&risk_neighbor, &spec.checkpoints)?;
    let loss = risk.loss();
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| {
            pool.iter()
                .map(|z| (loss.value(x, z) - loss.value(y, z)).abs())
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Acceptance bands for comparing estimates with `c · t^γ / n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryBands {
    /// Pass needs `slope_t ≤ γ + t_slack`.
    pub t_slack: f64,
    /// Pass needs `slope_n` in this closed interval.
    pub n_range: (f64, f64),
    /// Doubling `n` must shrink the estimate to at most `factor / 2`.
    pub halving_factor: f64,
}

impl Default for TheoryBands {
    fn default() -> Self {
        TheoryBands {
            t_slack: 0.4,
            n_range: (-1.4, -0.6),
            halving_factor: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryComparison {
    pub gamma: f64,
    pub bands: TheoryBands,
    /// Pooled log-log slope in `t` with a separate intercept per `n`.
    pub slope_t: Option<f64>,
    /// Pooled log-log slope in `n` with a separate intercept per `t`.
    pub slope_n: Option<f64>,
    /// `ε̂(t, 2n)/ε̂(t, n)` for every available pair, as `(t, n, ratio)`.
    pub halving_ratios: Vec<(usize, usize, f64)>,
    pub halving_pass: bool,
    /// Geometric mean of `ε̂ n / t^γ` over the positive estimates.
    pub theory_constant: Option<f64>,
    /// Every estimate is zero: the algorithm showed no sensitivity at all.
    pub trivially_stable: bool,
    /// Estimates dropped from the fits for being zero.
    pub dropped: usize,
    pub label: String,
    pub pass: bool,
}

/// Fits the estimates against `c · t^γ / n`; needs at least three distinct
/// checkpoints and two distinct sample sizes.
pub fn stability_vs_theory(
    estimates: &[StabilityEstimate],
    gamma: f64,
    bands: TheoryBands,
) -> Result<TheoryComparison> {
    let mut ts: Vec<usize> = estimates.iter().map(|e| e.t).collect();
    let mut ns: Vec<usize> = estimates.iter().map(|e| e.n).collect();
    ts.sort_unstable();
    ts.dedup();
    ns.sort_unstable();
    ns.dedup();
    if ts.len() < 3 || ns.len() < 2 {
        return Err(Error::Config(format!(
            "comparison needs ≥ 3 checkpoints and ≥ 2 sample sizes, have {} and {}",
            ts.len(),
            ns.len()
        )));
    }
    let positive: Vec<&StabilityEstimate> = estimates.iter().filter(|e| e.estimate > 0.0 && e.t > 0).collect();
    let dropped = estimates.len() - positive.len();
    let trivially_stable = estimates.iter().all(|e| e.estimate == 0.0);

    let pooled = |key: &dyn Fn(&StabilityEstimate) -> usize, x: &dyn Fn(&StabilityEstimate) -> f64| {
        let mut lx = Vec::new();
        let mut ly = Vec::new();
        let mut groups: Vec<usize> = positive.iter().map(|e| key(e)).collect();
        groups.sort_unstable();
        groups.dedup();
        for g in groups {
            let members: Vec<&&StabilityEstimate> = positive.iter().filter(|e| key(e) == g).collect();
            if members.len() < 2 {
                continue;
            }
            let mx = members.iter().map(|e| x(e).ln()).sum::<f64>() / members.len() as f64;
            let my = members.iter().map(|e| e.estimate.ln()).sum::<f64>() / members.len() as f64;
            for e in members {
                lx.push(x(e).ln() - mx);
                ly.push(e.estimate.ln() - my);
            }
        }
        let spread = lx.iter().any(|v| v.abs() > 0.0);
        (spread).then(|| least_squares(&lx, &ly).0)
    };
    let slope_t = pooled(&|e| e.n, &|e| e.t as f64);
    let slope_n = pooled(&|e| e.t, &|e| e.n as f64);

    let mut halving_ratios = Vec::new();
    for a in estimates {
        if let Some(b) = estimates.iter().find(|b| b.t == a.t && b.n == 2 * a.n) {
            if a.estimate > 0.0 {
                halving_ratios.push((a.t, a.n, b.estimate / a.estimate));
            }
        }
    }
    halving_ratios.sort_by_key(|r| (r.0, r.1));
    let limit = bands.halving_factor / 2.0;
    let halving_pass = halving_ratios.iter().all(|r| r.2 <= limit);

    let theory_constant = (!positive.is_empty()).then(|| {
        let s: f64 = positive
            .iter()
            .map(|e| (e.estimate * e.n as f64 / (e.t as f64).powf(gamma)).ln())
            .sum();
        (s / positive.len() as f64).exp()
    });

    let pass = trivially_stable
        || matches!((slope_t, slope_n), (Some(st), Some(sn))
            if st <= gamma + bands.t_slack && sn >= bands.n_range.0 && sn <= bands.n_range.1);
    Ok(TheoryComparison {
        gamma,
        bands,
        slope_t,
        slope_n,
        halving_ratios,
        halving_pass,
        theory_constant,
        trivially_stable,
        dropped,
        label: ESTIMATE_LABEL.into(),
        pass,
    })
}
