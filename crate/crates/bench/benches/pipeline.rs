use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use eisenhart::flatmap::{map_ho_const, map_ho_timedep, verify_map, HChoice, PotentialSpec, VerifyOptions};
use eisenhart::geometry::{build_metric, cotton, is_flat, riemann, ZeroTest};
use eisenhart::quantum::crank_nicolson;
use eisenhart::schwarzian::solve_hill;
use eisenhart::{Bindings, Expr};
use eisenhart_bench::{expr, linear_packet, quadratic_potential};

fn curvature(c: &mut Criterion) {
    let v = quadratic_potential();
    let omega = expr("1/cos(t)^2");
    c.bench_function("riemann", |b| {
        b.iter(|| riemann(&build_metric(black_box(&v), &omega).unwrap()))
    });
    c.bench_function("cotton", |b| {
        b.iter(|| cotton(&build_metric(black_box(&v), &Expr::one()).unwrap()))
    });
    let ho = expr("0.5*x^2");
    let test = ZeroTest::default();
    c.bench_function("is_flat", |b| {
        b.iter(|| is_flat(black_box(&ho), &omega, &Bindings::new(), &test).unwrap())
    });
}

fn maps(c: &mut Criterion) {
    let w = expr("1 + 0.3*sin(t)");
    c.bench_function("hill_solve", |b| {
        b.iter(|| solve_hill(black_box(&w), &Bindings::new(), (-1.2, 1.2), 1e-12).unwrap())
    });
    c.bench_function("map_ho_timedep", |b| {
        b.iter(|| map_ho_timedep(black_box(&w), &Bindings::new(), HChoice::Zero, (-1.2, 1.2), 1e-12).unwrap())
    });
    let map = map_ho_const(1.0, 1.0, 1.0, 0.0).unwrap();
    let spec = PotentialSpec::oscillator(1.0);
    c.bench_function("verify_map", |b| {
        b.iter(|| verify_map(black_box(&map), &spec, &VerifyOptions::default()).unwrap())
    });
}

fn propagation(c: &mut Criterion) {
    let grid = linear_packet(2048);
    let v = expr("x");
    c.bench_function("crank_nicolson_2048x64", |b| {
        b.iter(|| crank_nicolson(black_box(&grid), &v, &Bindings::new(), 0.01, 64).unwrap())
    });
}

criterion_group!(benches, curvature, maps, propagation);
criterion_main!(benches);
