use std::hint::black_box;

use accbias_core::analytics::{bias_only_type1, enumerate_categories, expected_meta_z};
use accbias_core::{combine_estimate, normal, GoldRushParams, StudyOutcome};
use criterion::{criterion_group, criterion_main, Criterion};

fn closed_forms(c: &mut Criterion) {
    let params = GoldRushParams::default();
    c.bench_function("expected_meta_z", |b| {
        b.iter(|| expected_meta_z(black_box(5), &params).unwrap())
    });
    c.bench_function("bias_only_type1", |b| {
        b.iter(|| bias_only_type1(black_box(3), &params).unwrap())
    });
    c.bench_function("normal_quantile", |b| {
        b.iter(|| normal::quantile(black_box(0.025)))
    });
}

fn enumeration(c: &mut Criterion) {
    let params = GoldRushParams::default();
    let mut group = c.benchmark_group("enumerate_categories");
    group.sample_size(10);
    for t in [4u32, 8, 12] {
        group.bench_function(format!("t{t}"), |b| {
            b.iter(|| {
                enumerate_categories(black_box(t), &params)
                    .unwrap()
                    .surviving_mass(t)
            })
        });
    }
    group.finish();
}

fn meta(c: &mut Criterion) {
    let studies: Vec<StudyOutcome> = (0..64)
        .map(|i| StudyOutcome::from_z((f64::from(i) * 0.7).sin(), 20 + i, 1.0).unwrap())
        .collect();
    c.bench_function("combine_estimate_64", |b| {
        b.iter(|| combine_estimate(black_box(&studies)).unwrap())
    });
}

criterion_group!(benches, closed_forms, enumeration, meta);
criterion_main!(benches);
