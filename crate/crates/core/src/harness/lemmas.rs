//! Every structural inequality behind the two algorithms, checked on random
//! instances in several dimensions.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::base_opt::{risk_minimizer, OracleOptions};
use crate::mirror::{check_regularized_relative_smoothness, lp_smoothness_counterexample, MirrorKind, MirrorMap};
use crate::objectives::{
    make_neighbor, stream, EmpiricalRisk, LossKind, LossModel, Objective, RegularizedRisk, SyntheticSpec,
};
use crate::par::{map_indexed, Execution};
use crate::stabreg_convex::{anchor_path_inequality, minimizer_shift_inequality, regularization_path_inequality};
use crate::stabreg_rel::{check_rel_mirror_lemma, regularized_minimizer, run_stabreg_rel_on, MirrorConfig};
use crate::tolerances;
use crate::vecspace::{dot, norm, sample_point, DomainSpec, NormSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaStatus {
    Pass,
    Fail,
    /// A certified minimizer could not be obtained.
    Inconclusive,
}

/// Deliberate bugs used to confirm that the checks can fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sabotage {
    #[default]
    None,
    /// Negates every Bregman divergence in the three-point check.
    BregmanSignFlip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub sabotage: Sabotage,
    /// Random instances per lemma and dimension.
    pub cases: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            sizes: vec![2, 5, 20],
            sabotage: Sabotage::None,
            cases: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaEntry {
    pub name: String,
    pub statement: String,
    pub dims: Vec<usize>,
    pub cases: usize,
    /// Largest `lhs − rhs` seen; negative means every case held strictly.
    pub worst_excess: f64,
    pub status: LemmaStatus,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub sabotage: Sabotage,
    pub entries: Vec<LemmaEntry>,
    pub status: LemmaStatus,
}

#[derive(Clone, Copy, Debug)]
struct Outcome {
    excess: f64,
    pass: bool,
}

impl Outcome {
    fn of(lhs: f64, rhs: f64, slack: f64) -> Self {
        Outcome {
            excess: lhs - rhs,
            pass: lhs <= rhs + slack,
        }
    }
}

type Check = fn(usize, &mut ChaCha8Rng, &VerifyOptions) -> Result<Vec<Outcome>>;

const LEMMAS: [(&str, &str, Check); 7] = [
    (
        "regularization_path",
        "‖x*₁ − x*₂‖² ≤ ((λ₁ − λ₂)/(λ₁ + λ₂))(‖x*₂ − x₀‖² − ‖x*₁ − x₀‖²)",
        regularization_path,
    ),
    ("anchor_path", "‖x₀ − x*_λ‖² + ‖x*_λ − x*‖² ≤ ‖x₀ − x*‖²", anchor_path),
    (
        "minimizer_shift",
        "‖x₂ − x₁‖ ≤ (2/μ)‖∇h(x₁)‖_* for h = f₂ − f₁",
        minimizer_shift,
    ),
    (
        "relative_smoothness",
        "F + λR is (β + λ)-smooth and λ-strongly convex relative to R",
        relative_smoothness,
    ),
    (
        "relative_mirror_descent",
        "monotone values, (1 − λ/(β+λ)) Bregman contraction, λB(x,x₀)/((1+λ/β)^t − 1) rate",
        relative_mirror_descent,
    ),
    ("three_point", "φ(x) + B(x,z) ≥ φ(z⁺) + B(z⁺,z) + B(x,z⁺)", three_point),
    (
        "lp_nonsmoothness",
        "(1 + ε^p)^{2/p} − 1 > βε²/2 for some ε, p = 1.5",
        lp_nonsmoothness,
    ),
];

/// Runs every check at every size in `opts.sizes`.
pub fn verify_all_lemmas(opts: &VerifyOptions, exec: Execution) -> LemmaReport {
    let jobs: Vec<(usize, usize)> = (0..LEMMAS.len())
        .flat_map(|l| opts.sizes.iter().map(move |&d| (l, d)))
        .collect();
    let results = map_indexed(jobs.len(), exec, |j| {
        let (l, d) = jobs[j];
        let mut rng = stream(opts.seed, ((l as u64) << 32) + d as u64);
        LEMMAS[l].2(d, &mut rng, opts)
    });
    let entries: Vec<LemmaEntry> = if opts.sizes.is_empty() {
        Vec::new()
    } else {
        LEMMAS
            .iter()
            .enumerate()
            .map(|(l, (name, statement, _))| {
                let mut entry = LemmaEntry {
                    name: name.to_string(),
                    statement: statement.to_string(),
                    dims: opts.sizes.clone(),
                    cases: 0,
                    worst_excess: f64::NEG_INFINITY,
                    status: LemmaStatus::Pass,
                    notes: Vec::new(),
                };
                let mut failed = false;
                let mut inconclusive = false;
                for (j, res) in results.iter().enumerate().filter(|(j, _)| jobs[*j].0 == l) {
                    let d = jobs[j].1;
                    match res {
                        Ok(outcomes) => {
                            entry.cases += outcomes.len();
                            for o in outcomes {
                                entry.worst_excess = entry.worst_excess.max(o.excess);
                                failed |= !o.pass;
                            }
                        }
                        Err(e) if e.is_oracle_failure() => {
                            inconclusive = true;
                            entry.notes.push(format!("d = {d}: {e}"));
                        }
                        Err(e) => {
                            failed = true;
                            entry.notes.push(format!("d = {d}: {e}"));
                        }
                    }
                }
                entry.status = if failed {
                    LemmaStatus::Fail
                } else if inconclusive {
                    LemmaStatus::Inconclusive
                } else {
                    LemmaStatus::Pass
                };
                entry
            })
            .collect()
    };
    let status = if entries.iter().any(|e| e.status == LemmaStatus::Fail) {
        LemmaStatus::Fail
    } else if entries.iter().any(|e| e.status == LemmaStatus::Inconclusive) {
        LemmaStatus::Inconclusive
    } else {
        LemmaStatus::Pass
    };
    LemmaReport {
        seed: opts.seed,
        sizes: opts.sizes.clone(),
        sabotage: opts.sabotage,
        entries,
        status,
    }
}

fn euclidean_risk(d: usize, rng: &mut ChaCha8Rng) -> Result<EmpiricalRisk> {
    let data = SyntheticSpec::classification(rng.random(), 10 * d + 50, d, 1.0, NormSpec::L2).generate()?;
    let loss = LossModel::certified(LossKind::Logistic, &data)?;
    EmpiricalRisk::new(data, loss)
}

fn tight() -> OracleOptions {
    OracleOptions {
        dist_tol: Some(1e-9),
        ..OracleOptions::default()
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

fn regularization_path(d: usize, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Outcome>> {
    let risk = euclidean_risk(d, rng)?;
    let beta = risk.loss().beta;
    (0..opts.cases)
        .map(|c| {
            let x0 = sample_point(DomainSpec::Unconstrained, d, 1.0, rng);
            let l1 = beta * log_uniform(rng, -2.0, 0.0);
            let l2 = if c == 0 { 0.0 } else { l1 * rng.random::<f64>() };
            let x1 = risk_minimizer(&risk, l1, &x0, DomainSpec::Unconstrained, &tight())?;
            let x2 = risk_minimizer(&risk, l2, &x0, DomainSpec::Unconstrained, &tight())?;
            let ineq = regularization_path_inequality(&x1.x, &x2.x, &x0, l1, l2);
            Ok(Outcome::of(ineq.lhs, ineq.rhs, tolerances::LEMMA_SLACK))
        })
        .collect()
}

fn anchor_path(d: usize, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Outcome>> {
    let risk = euclidean_risk(d, rng)?;
    let beta = risk.loss().beta;
    (0..opts.cases)
        .map(|_| {
            let x0 = sample_point(DomainSpec::Unconstrained, d, 1.0, rng);
            let lambda = beta * log_uniform(rng, -2.0, 0.0);
            let xl = risk_minimizer(&risk, lambda, &x0, DomainSpec::Unconstrained, &tight())?;
            let xs = risk_minimizer(&risk, 0.0, &x0, DomainSpec::Unconstrained, &tight())?;
            let ineq = anchor_path_inequality(&x0, &xl.x, &xs.x);
            Ok(Outcome::of(ineq.lhs, ineq.rhs, tolerances::LEMMA_SLACK))
        })
        .collect()
}

/// Two regularized risks on neighboring samples; `h` is the swapped
/// example's contribution.
fn minimizer_shift(d: usize, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Outcome>> {
    let spec = SyntheticSpec::classification(rng.random(), 10 * d + 50, d, 1.0, NormSpec::L2);
    let data = spec.generate()?;
    let loss = LossModel::for_feature_bound(LossKind::Logistic, NormSpec::L2, 1.0)?;
    let risk = EmpiricalRisk::new(data.clone(), loss)?;
    let planted = spec.planted();
    (0..opts.cases)
        .map(|_| {
            let i = rng.random_range(0..data.len());
            let neighbor = EmpiricalRisk::new(make_neighbor(&data, i, spec.draw(&planted, rng))?, loss)?;
            let x0 = sample_point(DomainSpec::Unconstrained, d, 1.0, rng);
            let lambda = loss.beta * log_uniform(rng, -2.0, 0.0);
            let x1 = risk_minimizer(&risk, lambda, &x0, DomainSpec::Unconstrained, &tight())?;
            let x2 = risk_minimizer(&neighbor, lambda, &x0, DomainSpec::Unconstrained, &tight())?;
            let g1 = risk.gradient(&x1.x);
            let g2 = neighbor.gradient(&x1.x);
            let grad_h: Vec<f64> = g2.iter().zip(&g1).map(|(a, b)| a - b).collect();
            let ineq = minimizer_shift_inequality(&x1.x, &x2.x, &grad_h, lambda, NormSpec::L2);
            Ok(Outcome::of(ineq.lhs, ineq.rhs, tolerances::LEMMA_SLACK))
        })
        .collect()
}

/// Mirror maps on bounded domains, each with the data geometry whose
/// constants it needs.
fn bounded_maps() -> Result<Vec<(MirrorMap, NormSpec)>> {
    Ok(vec![
        (MirrorMap::entropy(), NormSpec::L1),
        (MirrorMap::squared_l2(DomainSpec::L2Ball { radius: 2.0 })?, NormSpec::L2),
        (MirrorMap::squared_lp(1.5, 2.0)?, NormSpec::Lp(1.5)),
    ])
}

fn geometry_risk(d: usize, geometry: NormSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<EmpiricalRisk> {
    let data = SyntheticSpec::classification(rng.random(), n, d, 1.0, geometry).generate()?;
    let loss = LossModel::certified(LossKind::Logistic, &data)?;
    EmpiricalRisk::new(data, loss)
}

fn relative_smoothness(d: usize, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for (map, geometry) in bounded_maps()? {
        let risk = geometry_risk(d, geometry, 4 * d + 20, rng)?;
        for _ in 0..opts.cases {
            let lambda = risk.loss().beta * log_uniform(rng, -2.0, 1.0);
            let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..50)
                .map(|_| {
                    (
                        sample_point(map.domain, d, 1.0, rng),
                        sample_point(map.domain, d, 1.0, rng),
                    )
                })
                .collect();
            let f = RegularizedRisk::mirror(&risk, lambda, map);
            let rep = check_regularized_relative_smoothness(&f, &map, &pairs)?;
            out.push(Outcome {
                excess: rep.max_smoothness_violation.max(rep.max_strong_convexity_violation),
                pass: rep.pass,
            });
        }
    }
    Ok(out)
}

fn relative_mirror_descent(d: usize, rng: &mut ChaCha8Rng, _opts: &VerifyOptions) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for (map, geometry) in bounded_maps()? {
        let risk = geometry_risk(d, geometry, 4 * d + 20, rng)?;
        let beta = risk.loss().beta;
        let cfg = MirrorConfig::for_risk(map, &risk, 1.0, 40).with_lambda(beta / 10.0);
        let trace = run_stabreg_rel_on(&cfg, &risk)?;
        let xl = regularized_minimizer(&risk, &map, cfg.lambda, beta)?;
        let probes: Vec<Vec<f64>> = (0..4).map(|_| sample_point(map.domain, d, 1.0, rng)).collect();
        let rep = check_rel_mirror_lemma(&trace, &risk, &map, &xl.x, &probes)?;
        let excess = [&rep.monotone, &rep.contraction, &rep.contraction_total, &rep.rate]
            .iter()
            .filter_map(|f| f.as_ref())
            .map(|f| f.worst.lhs - rep.factor * f.worst.rhs)
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(Outcome { excess, pass: rep.pass });
    }
    Ok(out)
}

/// `φ(x) = c·x`, so `z⁺` is a plain mirror step from `z` with gradient `c`.
fn three_point(d: usize, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Outcome>> {
    let sign = match opts.sabotage {
        Sabotage::None => 1.0,
        Sabotage::BregmanSignFlip => -1.0,
    };
    let mut maps: Vec<MirrorMap> = bounded_maps()?.into_iter().map(|m| m.0).collect();
    maps.push(MirrorMap::squared_l2(DomainSpec::Unconstrained)?);
    maps.push(MirrorMap::new(
        MirrorKind::SquaredLp { p: 1.5 },
        DomainSpec::Unconstrained,
    )?);
    let mut out = Vec::new();
    for m in maps {
        let breg = |y: &[f64], x: &[f64]| m.bregman(y, x).map(|b| sign * b);
        for _ in 0..opts.cases * 10 {
            let z = sample_point(m.domain, d, 1.0, rng);
            let x = sample_point(m.domain, d, 1.0, rng);
            let c: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let zp = m.mirror_step(&z, &c, 1.0, 0.0)?;
            let lhs = dot(&c, &zp) + breg(&zp, &z)? + breg(&x, &zp)?;
            let rhs = dot(&c, &x) + breg(&x, &z)?;
            out.push(Outcome::of(lhs, rhs, tolerances::INEQUALITY_SLACK * rhs.abs().max(1.0)));
        }
    }
    Ok(out)
}

/// The counterexample for every β, cross-checked against direct evaluation
/// of `‖y‖_p² − ‖x‖_p² − ∇‖x‖_p²·(y − x)` at `x = e₁`, `y = e₁ + εe₂` in
/// dimension `d` where that is numerically meaningful.
fn lp_nonsmoothness(d: usize, _rng: &mut ChaCha8Rng, _opts: &VerifyOptions) -> Result<Vec<Outcome>> {
    if d < 2 {
        return Ok(Vec::new());
    }
    let p = 1.5;
    [1.0, 1e2, 1e4, 1e6]
        .iter()
        .map(|&beta| {
            let ce = lp_smoothness_counterexample(p, beta)
                .ok_or_else(|| Error::Config(format!("no counterexample found for β = {beta}")))?;
            let mut pass = ce.linearization_gap > ce.quadratic_bound;
            if ce.epsilon.powf(p) >= 1e-8 {
                let mut y = vec![0.0; d];
                y[0] = 1.0;
                y[1] = ce.epsilon;
                let direct = norm(&y, NormSpec::Lp(p)).powi(2) - 1.0;
                pass &= (direct - ce.linearization_gap).abs() <= 1e-6 * ce.linearization_gap;
            }
            Ok(Outcome {
                excess: ce.quadratic_bound - ce.linearization_gap,
                pass,
            })
        })
        .collect()
}
