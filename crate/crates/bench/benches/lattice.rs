use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heightzeta_bench::skewed_lattice;
use heightzeta_core::Complex64;
use std::hint::black_box;

fn theta(c: &mut Criterion) {
    let mut g = c.benchmark_group("theta");
    for d in [1, 2, 3, 4] {
        let l = skewed_lattice(d);
        g.bench_with_input(BenchmarkId::from_parameter(d), &l, |b, l| {
            b.iter(|| l.theta(black_box(0.5), 1e-12).unwrap())
        });
    }
    g.finish();
}

fn lambda(c: &mut Criterion) {
    let mut g = c.benchmark_group("completed_lambda");
    let s = Complex64::new(0.3, 0.7);
    for d in [1, 2, 3] {
        let l = skewed_lattice(d);
        g.bench_with_input(BenchmarkId::from_parameter(d), &l, |b, l| {
            b.iter(|| l.completed_lambda(black_box(s), 1e-12).unwrap())
        });
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let l = skewed_lattice(3);
    c.bench_function("enumerate_vectors/d3_r8", |b| {
        b.iter(|| l.enumerate_vectors(black_box(8.0)).unwrap().len())
    });
}

criterion_group!(benches, theta, lambda, enumeration);
criterion_main!(benches);
