use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use fracheat_bench::params;
use fracheat_core::kernels::{rx, rz, solution_cov, solution_cov_oracle};
use fracheat_core::quadrature::jacobi_rule;
use fracheat_core::Form;

fn rules(c: &mut Criterion) {
    let mut g = c.benchmark_group("jacobi_rule");
    for n in [32, 128, 256] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| jacobi_rule(n, 0.5, -0.5).unwrap()));
    }
    g.finish();
}

fn covariances(c: &mut Criterion) {
    let p1 = params(0.75, 1);
    let p3 = params(0.9, 3);
    c.bench_function("solution_cov d=1", |b| b.iter(|| solution_cov(&p1, black_box(1.0), black_box(0.7))));
    c.bench_function("solution_cov d=3", |b| b.iter(|| solution_cov(&p3, black_box(1.0), black_box(0.7))));
    c.bench_function("rx ibp", |b| b.iter(|| rx(0.75, black_box(1.0), black_box(0.7), Form::Ibp)));
    c.bench_function("rz", |b| b.iter(|| rz(0.9, black_box(1.0), black_box(0.7))));
    let mut g = c.benchmark_group("oracle");
    g.sample_size(20);
    for tol in [1e-6, 1e-10] {
        g.bench_with_input(BenchmarkId::from_parameter(tol), &tol, |b, &tol| {
            b.iter(|| solution_cov_oracle(&p1, black_box(1.0), black_box(0.7), tol))
        });
    }
    g.finish();
}

criterion_group!(benches, rules, covariances);
criterion_main!(benches);
