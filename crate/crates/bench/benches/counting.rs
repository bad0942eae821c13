use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use heightzeta_core::counts::{count_table, height_zeta_partial};
use heightzeta_core::fibration::{anticanonical_class, enumerate_fn};
use heightzeta_core::places::factorize_u64;
use heightzeta_core::{product_formula_check, ArchKind, Complex64, MetrizedLineBundle, Rat};
use std::hint::black_box;

fn counts(c: &mut Criterion) {
    let mut g = c.benchmark_group("count_table");
    g.sample_size(10);
    for (n, h) in [(1usize, 1000.0), (2, 60.0)] {
        for arch in [ArchKind::Max, ArchKind::L2] {
            let b = MetrizedLineBundle::new(n, 1, arch).unwrap();
            g.bench_with_input(BenchmarkId::new(format!("P{n}-{arch}"), h), &h, |bch, &h| {
                bch.iter(|| count_table(&b, &[black_box(h)]).unwrap())
            });
        }
    }
    g.finish();
}

fn zeta(c: &mut Criterion) {
    let b = MetrizedLineBundle::new(1, 1, ArchKind::Max).unwrap();
    c.bench_function("height_zeta_partial/P1_H200", |bch| {
        bch.iter(|| height_zeta_partial(&b, black_box(Complex64::new(3.0, 1.0)), 200.0).unwrap())
    });
}

fn fibrations(c: &mut Criterion) {
    let cls = anticanonical_class(1);
    c.bench_function("enumerate_fn/F1_H200", |b| {
        b.iter(|| enumerate_fn(1, &cls, ArchKind::Max, black_box(200.0)).unwrap().len())
    });
}

fn arithmetic(c: &mut Criterion) {
    c.bench_function("factorize_u64/semiprime", |b| {
        b.iter(|| factorize_u64(black_box(4294967291 * 4294967279)))
    });
    let x = Rat::new(2_u64.pow(40).into(), (3_u64.pow(20) * 1_000_003).into());
    c.bench_function("product_formula_check", |b| {
        b.iter(|| product_formula_check(black_box(&x)).unwrap())
    });
}

criterion_group!(benches, counts, zeta, fibrations, arithmetic);
criterion_main!(benches);
