use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oculolipid::morphometry::{extract_features, skeletonize, MorphometryConfig};
use oculolipid::pipeline::{lipid_retina_sweep, AnalysisConfig};
use oculolipid::stats::{bh_fdr, partial_correlation};
use oculolipid_bench::{cohort, mask, p_values};

fn morphometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("morphometry");
    group.sample_size(10);
    for size in [256, 512] {
        let m = mask(size, 1);
        group.bench_with_input(BenchmarkId::new("skeletonize", size), &m, |b, m| {
            b.iter(|| skeletonize(black_box(m.artery())))
        });
        let config = MorphometryConfig::default();
        group.bench_with_input(BenchmarkId::new("extract_features", size), &m, |b, m| {
            b.iter(|| extract_features(black_box(m), &config))
        });
    }
    group.finish();
}

fn statistics(c: &mut Criterion) {
    let data = cohort(7068, 1);
    let x = data.fundus[0].values.iter().map(|v| v.unwrap()).collect::<Vec<_>>();
    let y = data.lipids[0].values.iter().map(|v| v.unwrap()).collect::<Vec<_>>();
    let age = data.age.iter().map(|v| v.unwrap()).collect::<Vec<_>>();
    let sex = data.sex_codes().into_iter().map(|v| v.unwrap()).collect::<Vec<_>>();
    c.bench_function("partial_correlation_n7068", |b| {
        b.iter(|| partial_correlation(black_box(&x), black_box(&y), &[&age, &sex]))
    });
    let p = p_values(3366);
    c.bench_function("bh_fdr_3366", |b| b.iter(|| bh_fdr(black_box(&p), 0.05)));

    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let config = AnalysisConfig::default();
    group.bench_function("full_grid_n7068", |b| {
        b.iter(|| lipid_retina_sweep(black_box(&data), None, &config))
    });
    group.finish();
}

criterion_group!(benches, morphometry, statistics);
criterion_main!(benches);
