//! Parallel vs sequential throughput of the batch scan paths.
//!
//! Built with the default `parallel` feature, the plain entry points run on
//! rayon while the `_seq` variants stay single-threaded, so one bench run
//! compares both executions of the same workload.

use criterion::{criterion_group, criterion_main, Criterion};

use ghost_core::dims::Weight;
use ghost_core::params::{validate, WeightClass};
use ghost_core::scan;

fn class() -> WeightClass {
    WeightClass::new(validate(11, 2, 0, true).unwrap())
}

fn bench_coefficient_valuations(c: &mut Criterion) {
    let class = class();
    let eval = Weight::from_u64(14642);
    let mut group = c.benchmark_group("coefficient_valuations");
    group.sample_size(10);
    group.bench_function("parallel n=400", |b| {
        b.iter(|| scan::coefficient_valuations(&class, &eval, 400))
    });
    group.bench_function("sequential n=400", |b| {
        b.iter(|| scan::coefficient_valuations_seq(&class, &eval, 400))
    });
    group.finish();
}

fn bench_delta_profiles(c: &mut Criterion) {
    let class = class();
    let mut group = c.benchmark_group("delta_profiles");
    group.sample_size(10);
    group.bench_function("parallel k_max=120", |b| {
        b.iter(|| scan::delta_profiles(&class, 120))
    });
    group.bench_function("sequential k_max=120", |b| {
        b.iter(|| scan::delta_profiles_seq(&class, 120))
    });
    group.finish();
}

criterion_group!(benches, bench_coefficient_valuations, bench_delta_profiles);
criterion_main!(benches);
