use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use failprop_bench::{ba, grid_cascade};
use failprop_core::{monte_carlo, run, run_horizontal, EpidemicParams, StopRule};

fn epidemic(c: &mut Criterion) {
    let net = ba(500, 2, 1);
    let p = EpidemicParams::sid(0.1, 0.1, 0.05, 0.05);
    c.bench_function("sid_run_ba500_200ticks", |b| {
        b.iter(|| run(black_box(&net), &[0], &p, 200, StopRule::FixedTicks, 42).unwrap())
    });
    let small = ba(50, 2, 1);
    let sir = EpidemicParams::sir(0.3, 0.2);
    c.bench_function("sir_monte_carlo_ba50_100runs", |b| {
        b.iter(|| monte_carlo(black_box(&small), &[0], &sir, 200, StopRule::Absorb, 100, 7).unwrap())
    });
}

fn cascade(c: &mut Criterion) {
    let (net, sc) = grid_cascade(15, 15);
    c.bench_function("horizontal_grid15", |b| b.iter(|| run_horizontal(black_box(&net), &sc).unwrap()));
}

criterion_group!(benches, epidemic, cascade);
criterion_main!(benches);
