//! Sequential against parallel execution for the grid sweeps and exhaustive
//! checks. Build with `--no-default-features` to see the parallel arm fall
//! back to one thread.

use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use modeplex::belief::{check_plausibility, from_mass, validate_with, BeliefFunction, MassFunction, StatementSet};
use modeplex::cover::{default_margin, nerve_with, PartitionOfUnity};
use modeplex::par::Exec;
use modeplex::scenarios::offender::offender_cover;

const ARMS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

/// A belief function with mass on every singleton and pair of `n` statements.
fn belief(n: usize) -> BeliefFunction {
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let set = StatementSet::new(names).unwrap();
    let mut masses = BTreeMap::new();
    for i in 0..n {
        masses.insert(1u32 << i, 0.5 / n as f64);
        masses.insert((1u32 << i) | (1u32 << ((i + 1) % n)), 0.5 / n as f64);
    }
    from_mass(&MassFunction::new(set, masses).unwrap())
}

fn pou_grid(c: &mut Criterion) {
    let cover = offender_cover();
    let margin = default_margin(cover.space());
    let pou = PartitionOfUnity::build(&cover, margin, 64, Exec::default()).unwrap();
    let mut group = c.benchmark_group("pou_check_grid_512");
    group.sample_size(10);
    for (name, exec) in ARMS {
        group.bench_function(name, |b| b.iter(|| black_box(pou.check_grid(512, exec))));
    }
    group.finish();
}

fn belief_checks(c: &mut Criterion) {
    let mut group = c.benchmark_group("belief_exhaustive");
    group.sample_size(10);
    for n in [8usize, 10] {
        let bel = belief(n);
        for (name, exec) in ARMS {
            group.bench_with_input(BenchmarkId::new(format!("validate_{name}"), n), &bel, |b, bel| {
                b.iter(|| black_box(validate_with(bel, exec)))
            });
            group.bench_with_input(BenchmarkId::new(format!("plausibility_{name}"), n), &bel, |b, bel| {
                b.iter(|| black_box(check_plausibility(bel, exec)))
            });
        }
    }
    group.finish();
}

fn nerve_sampling(c: &mut Criterion) {
    let cover = offender_cover();
    let mut group = c.benchmark_group("nerve_256");
    group.sample_size(10);
    for (name, exec) in ARMS {
        group.bench_function(name, |b| b.iter(|| black_box(nerve_with(&cover, 256, exec).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, pou_grid, belief_checks, nerve_sampling);
criterion_main!(benches);
