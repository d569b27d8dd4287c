use std::hint::black_box;

use contest_bench::{linear_batch, log_batch};
use contest_core::bounds::BoundReport;
use contest_core::harness::{run_sweep, SweepConfig};
use contest_core::{solve_general_ne, solve_linear_ne, SolverConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn closed_form(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_form");
    for n in [5, 100, 10_000] {
        let batch = linear_batch(n, 0.7, 16);
        group.bench_with_input(BenchmarkId::from_parameter(n), &batch, |b, batch| {
            b.iter(|| {
                batch
                    .iter()
                    .map(|i| solve_linear_ne(black_box(i)).unwrap().rates()[0])
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

fn best_response(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("best_response");
    group.sample_size(20);
    let linear = linear_batch(5, 0.7, 8);
    group.bench_function("linear_n5", |b| {
        b.iter(|| {
            linear
                .iter()
                .map(|i| solve_general_ne(black_box(i), &cfg).unwrap().iterations)
                .sum::<usize>()
        })
    });
    let log = log_batch(5, 0.7, 8);
    group.bench_function("log_n5", |b| {
        b.iter(|| {
            log.iter()
                .map(|i| solve_general_ne(black_box(i), &cfg).unwrap().iterations)
                .sum::<usize>()
        })
    });
    group.finish();
}

fn bounds(c: &mut Criterion) {
    c.bench_function("bound_report_n5_grid", |b| {
        b.iter(|| {
            (0..=60)
                .map(|k| {
                    BoundReport::new(5, black_box(k as f64 * 0.05))
                        .unwrap()
                        .lb_b3
                })
                .sum::<f64>()
        })
    });
}

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let config = SweepConfig::linear(5, 3.0, 0.5, 100, 1);
    group.bench_function("linear_n5_7x100", |b| {
        b.iter(|| run_sweep(black_box(&config)).unwrap().summary.records)
    });
    group.finish();
}

criterion_group!(benches, closed_form, best_response, bounds, sweep);
criterion_main!(benches);
