use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gaussopt_core::pipeline::{fit_samples, Phase};
use gaussopt_core::{
    build_kernel, fit_surface, run_sweep, run_training, smooth, synthesize, ExperimentConfig,
};

fn bench_smooth(c: &mut Criterion) {
    let x = synthesize(1, 1024, 5, 10.0).unwrap().samples;
    let mut group = c.benchmark_group("smooth");
    for sigma in [0.5, 1.5, 3.5] {
        let k = build_kernel(sigma).unwrap();
        group.bench_function(format!("sigma_{sigma}"), |b| {
            b.iter(|| smooth(black_box(&x), &k).unwrap())
        });
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let config = ExperimentConfig::default();
    let noisy = config.noisy_signal(Phase::Training, 5, 35.0).unwrap();
    c.bench_function("sweep_321_points", |b| {
        b.iter(|| run_sweep(black_box(&noisy), &config.grid).unwrap())
    });
}

fn bench_fit(c: &mut Criterion) {
    let config = ExperimentConfig::default();
    let outcome = run_training(&config).unwrap();
    let samples = fit_samples(&outcome.curves, 7);
    c.bench_function("fit_surface", |b| {
        b.iter(|| fit_surface(black_box(&samples), 7.0).unwrap())
    });
    c.bench_function("run_training", |b| {
        b.iter(|| run_training(&config).unwrap())
    });
}

criterion_group!(benches, bench_smooth, bench_sweep, bench_fit);
criterion_main!(benches);
