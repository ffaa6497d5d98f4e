use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dexsel_core::corpus::synthetic::{generate_synthetic_corpus_with, score_synthetic_corpus};
use dexsel_core::corpus::TargetKind;
use dexsel_core::des::{select_experts, DesConfig};
use dexsel_core::scores::{compute_native_scores, MissingPolicy, NativeMetric, References};
use dexsel_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn native_scoring(c: &mut Criterion) {
    let corpus = generate_synthetic_corpus_with(100, 4, 1, Execution::Sequential);
    let references = References::new(corpus.summaries.iter().map(|s| s.targets.clone()));
    let mut group = c.benchmark_group("native_scores");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| compute_native_scores(&corpus.candidates, &references, &NativeMetric::ALL, exec).unwrap())
        });
    }
    group.finish();
}

fn selection(c: &mut Criterion) {
    let corpus = generate_synthetic_corpus_with(400, 6, 2, Execution::Parallel);
    let table = score_synthetic_corpus(&corpus, 2, Execution::Parallel).unwrap();
    let config = DesConfig::preset("des3").unwrap();
    let mut group = c.benchmark_group("select_experts");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| select_experts(&table, &config, TargetKind::Bhc, MissingPolicy::Strict, exec).unwrap())
        });
    }
    group.finish();
}

fn generation(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthetic_corpus");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| generate_synthetic_corpus_with(200, 4, 3, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, native_scoring, selection, generation);
criterion_main!(benches);
