use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use mfkrig::{
    fit_kriging, fit_mfk, kernel_matrix, log_marginal_likelihood, KernelConfig, KernelFamily,
    MfkVariant, NestingPolicy, SearchConfig,
};
use mfkrig_bench::{forrester_pair, synthetic};
use nalgebra::DMatrix;

fn bench_kernel_matrix(c: &mut Criterion) {
    let data = synthetic(100, 3);
    let kernel = KernelConfig::new(KernelFamily::SquaredExponential, vec![0.7, 1.3, 0.4]).unwrap();
    c.bench_function("kernel_matrix_100x100_d3", |b| {
        b.iter(|| kernel_matrix(black_box(&kernel), data.x(), data.x()).unwrap())
    });
}

fn bench_likelihood(c: &mut Criterion) {
    let data = synthetic(50, 2);
    let kernel = KernelConfig::new(KernelFamily::Matern52, vec![0.9, 0.5]).unwrap();
    c.bench_function("log_marginal_likelihood_n50", |b| {
        b.iter(|| log_marginal_likelihood(black_box(&data), &kernel, 1e-10).unwrap())
    });
}

fn bench_fit_kriging(c: &mut Criterion) {
    let (_, hf) = forrester_pair();
    let search = SearchConfig::default().with_seed(7);
    c.bench_function("fit_kriging_forrester_hf", |b| {
        b.iter(|| fit_kriging(black_box(&hf), KernelFamily::SquaredExponential, &search).unwrap())
    });
}

fn bench_fit_mfk(c: &mut Criterion) {
    let (lf, hf) = forrester_pair();
    let search = SearchConfig::default().with_seed(7);
    c.bench_function("fit_mfk_forrester_pair", |b| {
        b.iter(|| {
            fit_mfk(
                black_box(&[lf.clone(), hf.clone()]),
                MfkVariant::Mfk,
                KernelFamily::SquaredExponential,
                &search,
                NestingPolicy::default(),
            )
            .unwrap()
        })
    });
}

fn bench_predict(c: &mut Criterion) {
    let (lf, hf) = forrester_pair();
    let search = SearchConfig::default().with_seed(7);
    let model = fit_mfk(
        &[lf, hf],
        MfkVariant::Mfk,
        KernelFamily::SquaredExponential,
        &search,
        NestingPolicy::default(),
    )
    .unwrap();
    let grid = DMatrix::from_fn(201, 1, |i, _| i as f64 / 200.0);
    c.bench_function("predict_mfk_201_grid", |b| {
        b.iter_batched(
            || grid.clone(),
            |g| model.predict(black_box(&g)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_kernel_matrix,
    bench_likelihood,
    bench_fit_kriging,
    bench_fit_mfk,
    bench_predict
);
criterion_main!(benches);
