use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levy_besov::besov::{besov_norm, BesovParams};
use levy_besov::idlaw::LevyModel;
use levy_besov::moments::pairing_moment_cf;
use levy_besov::sampler::{sample_field, GridSpec, TestFunction};
use levy_besov::wavelet::{analyze, build_basis, synthesize};

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_field");
    let spec = GridSpec::new(1, 14, 4.0).unwrap();
    for (name, model) in [
        ("gaussian", LevyModel::Gaussian { sigma2: 1.0 }),
        ("sas-1.5", LevyModel::SymmetricStable { alpha: 1.5 }),
        ("laplace", LevyModel::Laplace),
        ("poisson", LevyModel::Poisson { lambda: 1.0 }),
    ] {
        group.bench_function(name, |b| b.iter(|| sample_field(&model, spec, black_box(1)).unwrap()));
    }
    group.finish();
}

fn transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("dwt");
    let model = LevyModel::Gaussian { sigma2: 1.0 };
    for (d, j) in [(1u32, 16u32), (2, 9), (3, 6)] {
        let spec = GridSpec::new(d as usize, j, 1.0).unwrap();
        let field = sample_field(&model, spec, 3).unwrap();
        let basis = build_basis(3).unwrap();
        let id = format!("d{d}-J{j}");
        group.bench_with_input(BenchmarkId::new("analyze", &id), &field, |b, f| {
            b.iter(|| analyze(black_box(f), &basis, j as usize).unwrap())
        });
        let pyr = analyze(&field, &basis, j as usize).unwrap();
        group.bench_with_input(BenchmarkId::new("synthesize", &id), &pyr, |b, p| {
            b.iter(|| synthesize(black_box(p), &basis).unwrap())
        });
    }
    group.finish();
}

fn norms(c: &mut Criterion) {
    let spec = GridSpec::new(2, 9, 1.0).unwrap();
    let field = sample_field(&LevyModel::SymmetricStable { alpha: 1.2 }, spec, 5).unwrap();
    let pyr = analyze(&field, &build_basis(3).unwrap(), 9).unwrap();
    let params = BesovParams::new(1.5, 2.0, -0.3, -1.0).unwrap();
    c.bench_function("besov_norm/d2-J9", |b| b.iter(|| besov_norm(black_box(&pyr), params).unwrap()));
}

fn moments(c: &mut Criterion) {
    let phi = TestFunction::from_fn(GridSpec::new(1, 6, 1.0).unwrap(), |x| (-x[0] * x[0]).exp());
    let model = LevyModel::Laplace;
    c.bench_function("pairing_moment_cf/laplace", |b| {
        b.iter(|| pairing_moment_cf(&model, black_box(&phi), 1.0).unwrap())
    });
}

criterion_group!(kernels, sampling, transform, norms, moments);
criterion_main!(kernels);
