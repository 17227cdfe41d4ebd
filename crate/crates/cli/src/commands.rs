use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context as _, Result};
use serde::Serialize;
use stabreg::base_opt::{risk_minimizer, BaseKind, OracleOptions};
use stabreg::check::Inequality;
use stabreg::harness::{
    epoch_window, estimate_stability, measure_convergence, stability_vs_theory, verify_all_lemmas, ConvergenceCurve,
    LemmaStatus, Sabotage, StabilityEstimate, StabilitySpec, VerifyOptions, Window,
};
use stabreg::mirror::{MirrorKind, MirrorMap};
use stabreg::par::Execution;
use stabreg::persist::{self, csv_string, fmt_f64};
use stabreg::stabreg_convex::{run_stabreg_convex, EpochParams, Termination, WrapperConfig};
use stabreg::stabreg_rel::{final_gap_inequality, risk_minimizer_on, run_stabreg_rel, MirrorConfig};
use stabreg::vecspace::DomainSpec;

use crate::config::{usage, ExperimentConfig, Method};
use crate::{Outcome, UsageError};

pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub dry_run: bool,
    pub exec: Execution,
}

impl Context {
    /// Creates the output directory and records the resolved config in it,
    /// minus the directory itself so that copies compare equal.
    fn prepare_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let recorded = ExperimentConfig {
            out: None,
            ..self.cfg.clone()
        };
        persist::write_text(&self.out.join("config.toml"), &recorded.to_toml())?;
        Ok(())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

/// Inner-solver cost class of a run. Wall-clock time goes to stdout only,
/// so that summaries stay byte-for-byte reproducible.
#[derive(Serialize)]
struct Timing {
    inner_solver: &'static str,
}

fn timing_for(kind: Option<MirrorKind>, domain: DomainSpec) -> Timing {
    let inner_solver = match (kind, domain) {
        (Some(MirrorKind::NegativeEntropy), _) => "closed form (softmax)",
        (Some(MirrorKind::SquaredLp { .. }), DomainSpec::LpBall { .. }) => {
            "bisection on the ℓp-ball multiplier every step (slower)"
        }
        (Some(MirrorKind::SquaredLp { .. }), _) => "closed form (dual map)",
        (_, DomainSpec::LpBall { .. }) => "bisection for the Euclidean ℓp-ball projection every step (slower)",
        _ => "closed form",
    };
    Timing { inner_solver }
}

#[derive(Serialize)]
struct ConvexSummary<'a> {
    algorithm: String,
    n: usize,
    d: usize,
    beta: f64,
    lipschitz: f64,
    dist_bound: f64,
    max_steps: usize,
    epochs_completed: usize,
    termination: Termination,
    /// `F_S(x_T) − F_S(x*)` at the last completed epoch's output.
    final_gap: f64,
    optimum: f64,
    oracle_gap_bound: f64,
    schedule: &'a [EpochParams],
    /// The epoch that did not fit in the step budget.
    pending_epoch: Option<EpochParams>,
    convergence: &'a ConvergenceCurve,
    timing: Timing,
}

fn schedule_csv(epochs: &[EpochParams]) -> Result<String> {
    Ok(csv_string(
        &["k", "lambda_k", "inner_calls", "half_steps", "start_step", "end_step"],
        epochs.iter().map(|p| {
            vec![
                p.k.to_string(),
                fmt_f64(p.lambda),
                p.inner_calls.to_string(),
                p.half_steps.to_string(),
                p.start_step.to_string(),
                p.end_step().to_string(),
            ]
        }),
    )?)
}

pub fn run_convex(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let problem = cfg.problem(Method::Convex)?;
    let base = cfg.base()?;
    let dist = cfg.convex_dist_bound()?;
    let domain = cfg.convex_domain();
    let risk = problem.risk().map_err(usage)?;
    let d = cfg.problem.d;
    let wrapper = WrapperConfig::for_risk(base, &risk, dist, vec![0.0; d], cfg.algorithm.steps, domain);
    wrapper.validate().map_err(usage)?;
    let (planned, termination, pending) = wrapper.planned_epochs();

    if ctx.dry_run {
        println!(
            "epoch wrapper: β = {}, G = {}, D = {dist}, n = {}",
            wrapper.beta, wrapper.lipschitz, wrapper.n
        );
        print!("{}", schedule_csv(&planned)?);
        match pending {
            Some(p) => println!(
                "next epoch k = {} would end at t = {} > T_max = {}",
                p.k,
                p.end_step(),
                wrapper.max_steps
            ),
            None => println!("schedule stops: {termination:?}"),
        }
        return Ok(Outcome::Success);
    }

    let clock = Instant::now();
    let trace = run_stabreg_convex(&wrapper, &risk).context("running the epoch wrapper")?;
    let elapsed = clock.elapsed();
    let star = risk_minimizer(&risk, 0.0, &wrapper.start, domain, &OracleOptions::default())
        .context("certifying the minimizer of the empirical risk")?;
    let curve = measure_convergence(
        &risk,
        &trace.outputs(),
        &star,
        epoch_window(&trace, cfg.harness.burn_in_epochs),
    )?;
    let final_gap = stabreg::objectives::Objective::value(&risk, trace.final_iterate()) - star.value;
    let schedule: Vec<EpochParams> = trace.epochs.iter().map(|e| e.params).collect();

    ctx.prepare_out()?;
    persist::write_text(
        &ctx.path("trace.csv"),
        &persist::convex_trace_csv(&trace, &risk, star.value)?,
    )?;
    persist::write_json(&ctx.path("trace.json"), "convex_trace", &trace)?;
    persist::write_text(&ctx.path("schedule.csv"), &schedule_csv(&schedule)?)?;
    let points: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.t as f64, p.gap)).collect();
    persist::write_text(&ctx.path("gap_curve.csv"), &persist::curve_csv(&points)?)?;
    let summary = ConvexSummary {
        algorithm: format!("stabreg_convex({})", base_name(base.kind)),
        n: wrapper.n,
        d,
        beta: wrapper.beta,
        lipschitz: wrapper.lipschitz,
        dist_bound: dist,
        max_steps: wrapper.max_steps,
        epochs_completed: trace.epochs.len(),
        termination: trace.termination,
        final_gap,
        optimum: star.value,
        oracle_gap_bound: star.gap_bound,
        schedule: &schedule,
        pending_epoch: trace.pending,
        convergence: &curve,
        timing: timing_for(
            match base.kind {
                BaseKind::Md { map } => Some(map),
                _ => None,
            },
            domain,
        ),
    };
    persist::write_json(&ctx.path("summary.json"), "convex_summary", &summary)?;

    println!(
        "{} epochs in {} steps, final gap {:e}",
        trace.epochs.len(),
        trace.max_steps,
        final_gap
    );
    if let Some(fit) = &curve.fit {
        println!("fitted log-log slope {:.3} over {} points", fit.slope, fit.xs.len());
    }
    println!("elapsed: {:.3} s", elapsed.as_secs_f64());
    println!("wrote {}", ctx.out.display());
    Ok(Outcome::Success)
}

fn base_name(kind: BaseKind) -> &'static str {
    match kind {
        BaseKind::Gd => "gd",
        BaseKind::Nag => "nag",
        BaseKind::Md { .. } => "md",
    }
}

#[derive(Serialize)]
struct MirrorSummary<'a> {
    algorithm: String,
    mirror: MirrorMap,
    n: usize,
    d: usize,
    beta: f64,
    lipschitz: f64,
    dist_bound: f64,
    steps: usize,
    lambda: f64,
    default_lambda: bool,
    precondition_holds: bool,
    warning: Option<String>,
    final_gap: f64,
    optimum: f64,
    oracle_gap_bound: f64,
    /// `F_S(x_T) − F_S(x*) ≤ 2λ(R(x*) − R(x_0))`, meaningful for `λ ≥ β/T`.
    gap_bound: Inequality,
    convergence: &'a ConvergenceCurve,
    timing: Timing,
}

pub fn run_mirror(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    let problem = cfg.problem(Method::Mirror)?;
    let mirror = cfg.mirror()?;
    let dist = cfg.mirror_dist_bound()?;
    let risk = problem.risk().map_err(usage)?;
    let mut mcfg = MirrorConfig::for_risk(mirror, &risk, dist, cfg.algorithm.steps);
    if let Some(l) = cfg.algorithm.lambda {
        mcfg = mcfg.with_lambda(l);
    }
    mcfg.validate().map_err(usage)?;
    if risk.loss().norm != mirror.norm() {
        return Err(UsageError(format!(
            "data geometry {:?} does not match the mirror map's norm {:?}",
            risk.loss().norm,
            mirror.norm()
        ))
        .into());
    }
    let warning = (!mcfg.precondition_holds()).then(|| {
        format!(
            "T = {} is below 2·log2(βDn/G); the run is outside the guarantee",
            mcfg.steps
        )
    });

    if ctx.dry_run {
        println!(
            "mirror descent: β = {}, G = {}, D = {dist}, n = {}, T = {}",
            mcfg.beta, mcfg.lipschitz, mcfg.n, mcfg.steps
        );
        println!(
            "lambda = {}{}",
            fmt_f64(mcfg.lambda),
            if mcfg.uses_default_lambda() { "" } else { " (fixed)" }
        );
        if let Some(w) = &warning {
            println!("warning: {w}");
        }
        return Ok(Outcome::Success);
    }

    let clock = Instant::now();
    let trace = run_stabreg_rel(&mcfg, &risk).context("running mirror descent")?;
    let elapsed = clock.elapsed();
    let star = risk_minimizer_on(&risk, &mirror).context("certifying the minimizer of the empirical risk")?;
    let outputs: Vec<(usize, &[f64])> = trace
        .iterates
        .iter()
        .enumerate()
        .map(|(t, x)| (t, x.as_slice()))
        .collect();
    let window = Window::From(cfg.harness.skip_fraction * trace.steps() as f64);
    let curve = measure_convergence(&risk, &outputs, &star, window)?;
    let gap_bound = final_gap_inequality(&trace, &risk, &mirror, &star.x);

    ctx.prepare_out()?;
    persist::write_text(
        &ctx.path("trace.csv"),
        &persist::mirror_trace_csv(&trace, &risk, star.value)?,
    )?;
    persist::write_json(&ctx.path("trace.json"), "mirror_trace", &trace)?;
    let summary = MirrorSummary {
        algorithm: cfg.algorithm_spec(Method::Mirror)?.id(),
        mirror,
        n: mcfg.n,
        d: cfg.problem.d,
        beta: mcfg.beta,
        lipschitz: mcfg.lipschitz,
        dist_bound: dist,
        steps: mcfg.steps,
        lambda: trace.lambda,
        default_lambda: mcfg.uses_default_lambda(),
        precondition_holds: trace.precondition_holds,
        warning: warning.clone(),
        final_gap: gap_bound.lhs,
        optimum: star.value,
        oracle_gap_bound: star.gap_bound,
        gap_bound,
        convergence: &curve,
        timing: timing_for(Some(mirror.kind), mirror.domain),
    };
    persist::write_json(&ctx.path("summary.json"), "mirror_summary", &summary)?;

    if let Some(w) = &warning {
        println!("warning: {w}");
    }
    println!(
        "λ = {}, final gap {:e} (bound {:e})",
        fmt_f64(trace.lambda),
        gap_bound.lhs,
        gap_bound.rhs
    );
    println!("elapsed: {:.3} s", elapsed.as_secs_f64());
    println!("wrote {}", ctx.out.display());
    Ok(Outcome::Success)
}

fn stability_spec(cfg: &ExperimentConfig, n: usize) -> Result<StabilitySpec, UsageError> {
    let method = cfg.algorithm.method;
    let spec = StabilitySpec {
        problem: cfg.problem(method)?.with_n(n),
        algorithm: cfg.algorithm_spec(method)?,
        checkpoints: cfg.harness.checkpoints.clone(),
        trials: cfg.harness.trials,
        pool_size: cfg.harness.pool_size,
        seed: cfg.seed,
    };
    if spec.trials == 0 {
        return Err(UsageError("trials must be at least 1".into()));
    }
    if spec.checkpoints.is_empty() {
        return Err(UsageError("at least one checkpoint is required".into()));
    }
    Ok(spec)
}

fn print_plan(specs: &[StabilitySpec]) {
    for s in specs {
        println!(
            "{}: n = {}, checkpoints {:?}, {} trials, pool {}",
            s.algorithm.id(),
            s.problem.data.n,
            s.checkpoints,
            s.trials,
            s.pool_size
        );
    }
}

fn estimates_csv(est: &[StabilityEstimate]) -> Result<String> {
    Ok(csv_string(
        &["t", "n", "estimate"],
        est.iter()
            .map(|e| vec![e.t.to_string(), e.n.to_string(), fmt_f64(e.estimate)]),
    )?)
}

fn run_estimates(specs: &[StabilitySpec], exec: Execution) -> Result<Vec<StabilityEstimate>> {
    let mut all = Vec::new();
    for s in specs {
        let est =
            estimate_stability(s, exec).with_context(|| format!("stability estimate at n = {}", s.problem.data.n))?;
        all.extend(est);
    }
    Ok(all)
}

pub fn stability(ctx: &Context) -> Result<Outcome> {
    let spec = stability_spec(&ctx.cfg, ctx.cfg.problem.n)?;
    if ctx.dry_run {
        print_plan(std::slice::from_ref(&spec));
        return Ok(Outcome::Success);
    }
    let clock = Instant::now();
    let est = run_estimates(std::slice::from_ref(&spec), ctx.exec)?;
    ctx.prepare_out()?;
    persist::write_json(&ctx.path("stability.json"), "stability_estimates", &est)?;
    let points: Vec<(f64, f64)> = est.iter().map(|e| (e.t as f64, e.estimate)).collect();
    persist::write_text(&ctx.path("stability.csv"), &persist::curve_csv(&points)?)?;
    for e in &est {
        println!("t = {:>6}: {:e} ({})", e.t, e.estimate, e.label);
    }
    println!("elapsed: {:.3} s", clock.elapsed().as_secs_f64());
    println!("wrote {}", ctx.out.display());
    Ok(Outcome::Success)
}

pub fn sweep(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.cfg;
    if cfg.harness.ns.is_empty() {
        return Err(UsageError("sweep needs at least one sample size".into()).into());
    }
    let specs = cfg
        .harness
        .ns
        .iter()
        .map(|&n| stability_spec(cfg, n))
        .collect::<Result<Vec<_>, _>>()?;
    let gamma = cfg.gamma()?;
    if ctx.dry_run {
        print_plan(&specs);
        println!("theory exponent γ = {gamma}, bands {:?}", cfg.harness.bands);
        return Ok(Outcome::Success);
    }
    let clock = Instant::now();
    let est = run_estimates(&specs, ctx.exec)?;
    let cmp = stability_vs_theory(&est, gamma, cfg.harness.bands).map_err(usage)?;
    ctx.prepare_out()?;
    persist::write_json(&ctx.path("sweep.json"), "stability_estimates", &est)?;
    persist::write_text(&ctx.path("sweep.csv"), &estimates_csv(&est)?)?;
    for s in &specs {
        let n = s.problem.data.n;
        let points: Vec<(f64, f64)> = est
            .iter()
            .filter(|e| e.n == n)
            .map(|e| (e.t as f64, e.estimate))
            .collect();
        persist::write_text(&ctx.path(&format!("sweep_n{n}.csv")), &persist::curve_csv(&points)?)?;
    }
    persist::write_json(&ctx.path("comparison.json"), "theory_comparison", &cmp)?;
    println!(
        "slope in t {:?} (≤ {}), slope in n {:?} (in [{}, {}]), halving {}: {}",
        cmp.slope_t,
        gamma + cmp.bands.t_slack,
        cmp.slope_n,
        cmp.bands.n_range.0,
        cmp.bands.n_range.1,
        if cmp.halving_pass { "ok" } else { "failed" },
        if cmp.pass { "pass" } else { "FAIL" }
    );
    println!("elapsed: {:.3} s", clock.elapsed().as_secs_f64());
    println!("wrote {}", ctx.out.display());
    Ok(if cmp.pass {
        Outcome::Success
    } else {
        Outcome::CheckFailed
    })
}

pub fn verify(ctx: &Context) -> Result<Outcome> {
    let h = &ctx.cfg.harness;
    let opts = VerifyOptions {
        seed: ctx.cfg.seed,
        sizes: h.sizes.clone(),
        sabotage: if h.sabotage {
            Sabotage::BregmanSignFlip
        } else {
            Sabotage::None
        },
        cases: h.cases,
    };
    if ctx.dry_run {
        println!(
            "lemma checks at d ∈ {:?}, {} cases each, seed {}, sabotage {:?}",
            opts.sizes, opts.cases, opts.seed, opts.sabotage
        );
        return Ok(Outcome::Success);
    }
    let report = verify_all_lemmas(&opts, ctx.exec);
    ctx.prepare_out()?;
    persist::write_json(&ctx.path("lemmas.json"), "lemma_report", &report)?;
    write_lemma_table(&ctx.path("lemmas.csv"), &report.entries)?;
    for e in &report.entries {
        println!(
            "{:<26} {:?} ({} cases, worst excess {:e})",
            e.name, e.status, e.cases, e.worst_excess
        );
        for note in &e.notes {
            println!("    {note}");
        }
    }
    println!("overall: {:?}", report.status);
    println!("wrote {}", ctx.out.display());
    Ok(match report.status {
        LemmaStatus::Pass => Outcome::Success,
        LemmaStatus::Fail => Outcome::CheckFailed,
        LemmaStatus::Inconclusive => Outcome::Inconclusive,
    })
}

fn write_lemma_table(path: &Path, entries: &[stabreg::harness::LemmaEntry]) -> Result<()> {
    let text = csv_string(
        &["lemma", "status", "cases", "worst_excess"],
        entries.iter().map(|e| {
            vec![
                e.name.clone(),
                format!("{:?}", e.status).to_lowercase(),
                e.cases.to_string(),
                fmt_f64(e.worst_excess),
            ]
        }),
    )?;
    persist::write_text(path, &text)?;
    Ok(())
}
