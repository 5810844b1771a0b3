//! Sequential against rayon execution for the data-parallel kernels.
//!
//! Run with: cargo bench -p bdstein --bench par_vs_seq

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use bdstein::bdchain::{empirical_sup_norm, NormOrder, RateSchedule};
use bdstein::distcore::make_dist;
use bdstein::models::{birthday, kruns_law_bruteforce, BirthdayMode};
use bdstein::oracle::random_sconvex_validation;
use bdstein::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn stein_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("empirical_sup_norm");
    let r = RateSchedule::poisson(10.0);
    group.throughput(Throughput::Elements(2000));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "poisson10"), &exec, |b, &exec| {
            b.iter(|| empirical_sup_norm(black_box(&r), NormOrder::Delta(1), 2000, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn kruns_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("kruns_enumeration");
    group.sample_size(10);
    for n in [16u32, 20] {
        group.throughput(Throughput::Elements(1 << n));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &exec, |b, &exec| {
                b.iter(|| kruns_law_bruteforce(black_box(n), 2, 0.5, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn sconvex_validation(c: &mut Criterion) {
    let mut group = c.benchmark_group("sconvex_validation");
    let a = make_dist(0, vec![0.1, 0.2, 0.3, 0.2, 0.1, 0.05, 0.05]).unwrap();
    let b = make_dist(0, vec![0.05, 0.25, 0.3, 0.25, 0.1, 0.05]).unwrap();
    group.throughput(Throughput::Elements(20_000));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "s3"), &exec, |bch, &exec| {
            bch.iter(|| random_sconvex_validation(black_box(&a), black_box(&b), 3, 20_000, 9, exec).unwrap())
        });
    }
    group.finish();
}

fn birthday_mc(c: &mut Criterion) {
    let mut group = c.benchmark_group("birthday_monte_carlo");
    group.sample_size(10);
    let samples = 200_000;
    group.throughput(Throughput::Elements(samples));
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "N8_m20"), &exec, |b, &exec| {
            b.iter(|| birthday(8, 20, 3, BirthdayMode::MonteCarlo { seed: 1, samples }, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, stein_norm, kruns_enumeration, sconvex_validation, birthday_mc);
criterion_main!(benches);
