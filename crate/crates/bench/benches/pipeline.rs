use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use wghe_bench::{cascade, random_walk, zigzag_track};
use wghe_core::cpa::{default_penalty, segment_trends};
use wghe_core::ghe::ghe_series;
use wghe_core::{analyze, AnalysisConfig};

fn ghe_surface(c: &mut Criterion) {
    let series = random_walk(5000);
    let cfg = AnalysisConfig::default().estimation_config();
    let mut g = c.benchmark_group("ghe_surface");
    g.sample_size(10);
    g.bench_function("n5000_dt250_26q", |b| b.iter(|| ghe_series(black_box(&series), &cfg).unwrap()));
    g.finish();
}

fn cpa(c: &mut Criterion) {
    let mut g = c.benchmark_group("segment_trends");
    for n in [500usize, 2000, 8000] {
        let track = zigzag_track(n, 120);
        let penalty = default_penalty(&track).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &track, |b, t| {
            b.iter(|| segment_trends(black_box(t), penalty, 10).unwrap())
        });
    }
    g.finish();
}

fn full_analysis(c: &mut Criterion) {
    let series = cascade(4096);
    let cfg = AnalysisConfig::default();
    let mut g = c.benchmark_group("analyze");
    g.sample_size(10);
    g.bench_function("cascade_4096", |b| b.iter(|| analyze(black_box(&series), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, ghe_surface, cpa, full_analysis);
criterion_main!(benches);
