use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use cfkit::datamodel::{build_model, RatingsModel, SplitConfig};
use cfkit::engine::available_workers;
use cfkit::knn::{
    aggregation_pass, neighbors_pass, similarity_pass, Aggregation, Metric, Orientation,
};
use cfkit::mf::{predictions_pass, train_pmf, PmfConfig};
use cfkit_testkit::gen::synthetic_ratings;

fn bench_model() -> RatingsModel {
    let triples = synthetic_ratings(300, 400, 60, 7);
    build_model(
        &triples,
        &SplitConfig {
            test_user_fraction: 0.2,
            test_item_fraction: 0.2,
            seed: 7,
            ..SplitConfig::default()
        },
    )
    .unwrap()
}

/// Worker counts compared in every group: the sequential path and the
/// rayon-backed path at full width.
fn worker_configs() -> Vec<(&'static str, usize)> {
    let mut configs = vec![("sequential", 1)];
    if cfg!(feature = "parallel") {
        configs.push(("parallel", available_workers().max(2)));
    }
    configs
}

fn bench_similarity_pass(c: &mut Criterion) {
    let model = bench_model();
    let mut group = c.benchmark_group("similarity_pass_cor");
    group.sample_size(10);
    for (label, workers) in worker_configs() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &workers, |b, &w| {
            b.iter(|| {
                similarity_pass(
                    black_box(&model),
                    Orientation::UserToUser,
                    Metric::Correlation,
                    w,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_knn_pipeline(c: &mut Criterion) {
    let model = bench_model();
    let mut group = c.benchmark_group("neighbors_and_dfm_k100");
    group.sample_size(10);
    for (label, workers) in worker_configs() {
        similarity_pass(&model, Orientation::UserToUser, Metric::Jmsd, workers).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(label), &workers, |b, &w| {
            b.iter(|| {
                neighbors_pass(black_box(&model), Orientation::UserToUser, 100, w).unwrap();
                aggregation_pass(
                    black_box(&model),
                    Orientation::UserToUser,
                    Aggregation::DeviationFromMean,
                    w,
                )
                .unwrap();
            })
        });
    }
    group.finish();
}

fn bench_mf_predictions(c: &mut Criterion) {
    let model = bench_model();
    let factors = train_pmf(
        &model,
        &PmfConfig {
            epochs: 3,
            ..PmfConfig::default()
        },
    )
    .unwrap();
    let mut group = c.benchmark_group("mf_predictions_pass");
    group.sample_size(10);
    for (label, workers) in worker_configs() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &workers, |b, &w| {
            b.iter(|| predictions_pass(black_box(&model), black_box(&factors), w).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_similarity_pass,
    bench_knn_pipeline,
    bench_mf_predictions
);
criterion_main!(benches);
