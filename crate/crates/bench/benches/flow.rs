use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tikflow::integrator::log_grid;
use tikflow::tikhonov::tikhonov_curve;
use tikflow::{classify_regime, integrate, Params};
use tikflow_bench::{fig1_run, logsumexp, loose_config};

fn integrate_fig1(c: &mut Criterion) {
    c.bench_function("integrate fig1 member to t=100", |b| b.iter(|| fig1_run(black_box(100.0))));
}

fn integrate_logsumexp(c: &mut Criterion) {
    let problem = logsumexp();
    let params = Params::new(3.5, 0.7, 1.0, 1.2, 2);
    let cfg = loose_config();
    c.bench_function("integrate logsumexp to t=1e3", |b| {
        b.iter(|| integrate(&problem, &params, black_box(1e3), &cfg).unwrap())
    });
}

fn tikhonov(c: &mut Criterion) {
    let problem = logsumexp();
    let grid = log_grid(1.0, 1e6, 50);
    c.bench_function("tikhonov curve logsumexp 301 points", |b| {
        b.iter(|| tikhonov_curve(&problem, 1.0, 1.2, black_box(&grid)).unwrap())
    });
}

fn classify(c: &mut Criterion) {
    c.bench_function("classify_regime", |b| {
        b.iter(|| classify_regime(black_box(&Params::new(3.5, 0.7, 1.0, 1.2, 1))))
    });
}

criterion_group!(benches, integrate_fig1, integrate_logsumexp, tikhonov, classify);
criterion_main!(benches);
