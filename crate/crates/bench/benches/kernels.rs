use std::sync::Arc;

use cknscope::flowfield::gradient;
use cknscope::geometry::ball_quadrature;
use cknscope::pressure::recover_pressure;
use cknscope::{FunctionalParams, Functionals};
use cknscope_bench::random_flow;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn bench_gradient(c: &mut Criterion) {
    let mut g = c.benchmark_group("gradient");
    for n in [16, 32] {
        let flow = random_flow(n, 3).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &flow, |b, f| b.iter(|| gradient(black_box(f))));
    }
    g.finish();
}

fn bench_ball(c: &mut Criterion) {
    let flow = random_flow(32, 2).unwrap();
    let grid = *flow.grid();
    let field: Vec<f64> = flow.velocity()[..3 * grid.points()].iter().step_by(3).copied().collect();
    let x = grid.center();
    let mut g = c.benchmark_group("ball_quadrature");
    for r in [0.25, 0.5, 1.0] {
        g.bench_with_input(BenchmarkId::new("build", r), &r, |b, &r| b.iter(|| ball_quadrature(&grid, x, r, 0.125).unwrap()));
        let q = ball_quadrature(&grid, x, r, 0.125).unwrap();
        g.bench_with_input(BenchmarkId::new("integrate", r), &q, |b, q| b.iter(|| q.integrate(black_box(&field))));
    }
    g.finish();
}

fn bench_functionals(c: &mut Criterion) {
    let flow = random_flow(32, 9).unwrap();
    let grad = Arc::new(gradient(&flow));
    let x = flow.grid().center();
    c.bench_function("functionals/values r=0.5", |b| {
        b.iter(|| {
            // A fresh evaluator each time so the per-cylinder cache does not hide the work.
            let ev = Functionals::with_gradient(&flow, grad.clone(), FunctionalParams::relaxed()).unwrap();
            ev.values(&ev.cylinder(x, 1.0, 0.5).unwrap()).unwrap()
        })
    });
}

fn bench_pressure(c: &mut Criterion) {
    let mut g = c.benchmark_group("pressure_recovery");
    for n in [16, 32] {
        let flow = random_flow(n, 2).unwrap().without_pressure();
        g.bench_with_input(BenchmarkId::from_parameter(n), &flow, |b, f| b.iter(|| recover_pressure(black_box(f)).unwrap()));
    }
    g.finish();
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = bench_gradient, bench_ball, bench_functionals, bench_pressure
}
criterion_main!(kernels);
