//! Kernel benchmarks: the alternating-trapezoidal Hilbert transform and
//! the double-sum bilinear quadrature, parallel path against the
//! sequential reference, plus the spectral transform and a full RK4 step
//! for scale.
//!
//! Run with `cargo bench`, or `cargo bench --no-default-features` to
//! measure the sequential build alone.

use blowup::dynamics::ModelSpec;
use blowup::grid::{Field, Grid, SolutionState};
use blowup::hilbert::{
    hilbert_line, hilbert_line_sequential, hilbert_periodic, weighted_bilinear_rhs,
    weighted_bilinear_rhs_sequential, TestWeight,
};
use blowup::integrator::rk4_step;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bump_field(n: usize) -> Field {
    let g = Grid::line(0.0, 1.0, (0.45, 0.55), n).unwrap();
    Field::from_fn(&g, |x| {
        let s = (x - 0.5) / 0.05;
        if s.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    })
    .with_support((0.45, 0.55))
}

fn wide_field(n: usize) -> Field {
    let g = Grid::line(-1.0, 1.0, (-0.9, 0.9), n).unwrap();
    Field::from_fn(&g, |x| {
        if x.abs() < 0.9 {
            (1.0 - (x / 0.9) * (x / 0.9)).powi(2)
        } else {
            0.0
        }
    })
    .with_support((-0.9, 0.9))
}

fn bench_hilbert_line(c: &mut Criterion) {
    let mut group = c.benchmark_group("hilbert_line");
    for &n in &[2048usize, 8192] {
        // compactly supported data: the inner loop runs over the support span
        let compact = bump_field(n);
        group.bench_with_input(BenchmarkId::new("compact/parallel", n), &compact, |b, f| {
            b.iter(|| hilbert_line(f).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("compact/sequential", n), &compact, |b, f| {
            b.iter(|| hilbert_line_sequential(f).unwrap())
        });
        // near-full-span data: the O(n^2) worst case
        let wide = wide_field(n);
        group.bench_with_input(BenchmarkId::new("wide/parallel", n), &wide, |b, f| {
            b.iter(|| hilbert_line(f).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("wide/sequential", n), &wide, |b, f| {
            b.iter(|| hilbert_line_sequential(f).unwrap())
        });
    }
    group.finish();
}

fn bench_bilinear_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("bilinear_rhs");
    group.sample_size(20);
    let f = wide_field(1024);
    let w = TestWeight::shifted_linear(-0.9);
    group.bench_function("parallel/1024", |b| {
        b.iter(|| weighted_bilinear_rhs(&f, &w).unwrap())
    });
    group.bench_function("sequential/1024", |b| {
        b.iter(|| weighted_bilinear_rhs_sequential(&f, &w).unwrap())
    });
    group.finish();
}

fn bench_spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group("periodic");
    let g = Grid::periodic(1.0, 16384).unwrap();
    let f = Field::from_fn(&g, |x| 2.0 + (2.0 * std::f64::consts::PI * x).sin());
    group.bench_function("hilbert/16384", |b| b.iter(|| hilbert_periodic(&f).unwrap()));
    let state = SolutionState::new(
        Field::from_fn(&g, |x| {
            2.0 + (2.0 * std::f64::consts::PI * x).sin()
                + (4.0 * std::f64::consts::PI * x).cos()
        }),
        Field::zeros(&g),
        0.0,
    );
    let model = ModelSpec::experiment();
    group.bench_function("rk4_step/16384", |b| {
        b.iter(|| rk4_step(&state, &model, 1e-4).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_hilbert_line, bench_bilinear_rhs, bench_spectral);
criterion_main!(benches);
