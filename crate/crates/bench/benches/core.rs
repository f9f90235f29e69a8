use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use suspension_lab::odometer::window;
use suspension_lab::oracle::FiniteGround;
use suspension_lab::point_process::{sample_poisson, uniform_point};
use suspension_lab::riesz::{default_grid, partial_coeffs, singularity_evidence};
use suspension_lab::GrowthSpec;

fn odometer(c: &mut Criterion) {
    let spec = GrowthSpec::default();
    let w = window(5, 20, &spec).unwrap();
    let p = uniform_point(&w.parts()[3], 7, &spec).unwrap();
    c.bench_function("apply_t x1000", |b| b.iter(|| black_box(&p).iterate(1000, &spec).unwrap()));
    c.bench_function("preimage of window(5)", |b| b.iter(|| black_box(&w).preimage(&spec).unwrap()));
}

fn sampling(c: &mut Criterion) {
    let spec = GrowthSpec::default();
    let w = window(41, spec.truncation_k(), &spec).unwrap();
    let mut seed = 0u64;
    c.bench_function("sample window(41)", |b| {
        b.iter(|| {
            seed += 1;
            sample_poisson(black_box(&w), seed, &spec).unwrap()
        })
    });
}

fn riesz(c: &mut Criterion) {
    let spec = GrowthSpec::default();
    let grid = default_grid(&spec, 10).unwrap();
    c.bench_function("singularity grid J=10", |b| b.iter(|| singularity_evidence(&spec, 1, 2, 10, grid).unwrap()));
    c.bench_function("partial coefficients J=10", |b| b.iter(|| partial_coeffs(&spec, black_box(10)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let g = FiniteGround::new(vec![0.5, 1.25, 2.0, 0.75], 20).unwrap();
    let f = g.parse("N(A(0,1)) * I1(A(2) - A(3)) * (N(A(1)) + 0.5)").unwrap();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(20);
    group.bench_function("expectation, 4 atoms", |b| b.iter(|| g.exact_expect(black_box(&f)).unwrap()));
    group.bench_function("order-2 projection table", |b| b.iter(|| g.oracle_projection(black_box(&f), 2).unwrap()));
    group.finish();
}

criterion_group!(benches, odometer, sampling, riesz, oracle);
criterion_main!(benches);
