use std::hint::black_box;

use axcomp::oracle::rate_from_choi;
use axcomp::optimize::{tilde_f1, tilde_j1};
use axcomp::rates::{bb84_j1, six_state_f2};
use axcomp::{choi_from_stokes, full_report, random_unital, signed_svd3, SearchConfig, UnitalChannel};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn channels() -> Vec<UnitalChannel> {
    (0..16)
        .map(|s| UnitalChannel::new(random_unital(s)).unwrap())
        .collect()
}

fn closed_forms(c: &mut Criterion) {
    let us = channels();
    c.bench_function("signed_svd3", |b| {
        b.iter(|| {
            for u in &us {
                black_box(signed_svd3(black_box(u.matrix())));
            }
        })
    });
    c.bench_function("six_state_f2", |b| {
        b.iter(|| {
            for u in &us {
                black_box(six_state_f2(black_box(u)).unwrap());
            }
        })
    });
    c.bench_function("bb84_j1", |b| {
        b.iter(|| {
            for u in &us {
                black_box(bb84_j1(black_box(u)));
            }
        })
    });
}

fn oracle(c: &mut Criterion) {
    let chois: Vec<_> = channels().iter().map(|u| choi_from_stokes(u.channel())).collect();
    c.bench_function("rate_from_choi", |b| {
        b.iter(|| {
            for rho in &chois {
                black_box(rate_from_choi(black_box(rho)).unwrap());
            }
        })
    });
}

fn searches(c: &mut Criterion) {
    let u = UnitalChannel::new(random_unital(7)).unwrap();
    let mut group = c.benchmark_group("conventional_search");
    group.sample_size(10);
    for grid in [12usize, 24, 48] {
        let cfg = SearchConfig {
            coarse_grid: grid,
            ..SearchConfig::default()
        };
        group.bench_with_input(BenchmarkId::new("tilde_f1", grid), &cfg, |b, cfg| {
            b.iter(|| tilde_f1(&u, cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("tilde_j1", grid), &cfg, |b, cfg| {
            b.iter(|| tilde_j1(&u, cfg).unwrap())
        });
    }
    group.finish();
    c.bench_function("full_report", |b| {
        b.iter(|| full_report(&u, &SearchConfig::default()).unwrap())
    });
}

criterion_group!(benches, closed_forms, oracle, searches);
criterion_main!(benches);
