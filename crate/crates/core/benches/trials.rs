//! Parallel vs. sequential execution of the independent-trial loops.
//!
//! Build with `--no-default-features` to time the sequential fallback alone;
//! both variants always produce identical results.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stabreg::base_opt::BaseOptimizer;
use stabreg::harness::{
    estimate_stability, verify_all_lemmas, AlgorithmSpec, ProblemSpec, StabilitySpec, VerifyOptions,
};
use stabreg::mirror::MirrorMap;
use stabreg::objectives::{LossKind, SyntheticSpec};
use stabreg::par::Execution;
use stabreg::vecspace::{DomainSpec, NormSpec};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn stability_trials(c: &mut Criterion) {
    let convex = StabilitySpec {
        problem: ProblemSpec {
            loss: LossKind::Logistic,
            data: SyntheticSpec::classification(1, 100, 5, 1.0, NormSpec::L2),
        },
        algorithm: AlgorithmSpec::Convex {
            base: BaseOptimizer::nag(),
            dist_bound: 5.0,
            domain: DomainSpec::L2Ball { radius: 5.0 },
        },
        checkpoints: vec![100, 200, 400],
        trials: 8,
        pool_size: 200,
        seed: 3,
    };
    let mirror = StabilitySpec {
        problem: ProblemSpec {
            loss: LossKind::Logistic,
            data: SyntheticSpec::classification(1, 100, 8, 1.0, NormSpec::L1),
        },
        algorithm: AlgorithmSpec::Mirror {
            mirror: MirrorMap::entropy(),
            dist_bound: 8f64.ln().sqrt(),
            lambda: None,
        },
        checkpoints: vec![100, 200],
        trials: 8,
        pool_size: 200,
        seed: 3,
    };
    let mut group = c.benchmark_group("estimate_stability");
    group.sample_size(10);
    for (name, spec) in [("convex_nag", &convex), ("mirror_entropy", &mirror)] {
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, mode), spec, |b, spec| {
                b.iter(|| black_box(estimate_stability(spec, exec).unwrap()))
            });
        }
    }
    group.finish();
}

fn lemma_suite(c: &mut Criterion) {
    let opts = VerifyOptions {
        sizes: vec![2, 5],
        ..VerifyOptions::default()
    };
    let mut group = c.benchmark_group("verify_all_lemmas");
    group.sample_size(10);
    for (mode, exec) in MODES {
        group.bench_function(mode, |b| b.iter(|| black_box(verify_all_lemmas(&opts, exec))));
    }
    group.finish();
}

criterion_group!(benches, stability_trials, lemma_suite);
criterion_main!(benches);
