//! Sequential versus rayon execution for the data-parallel loops: Monte Carlo
//! trials and the all-vertices / all-pairs exact verification.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ohmwalk::fixtures::{complete, RandomNetworks};
use ohmwalk::monte_carlo::WalkRng;
use ohmwalk::{
    attach_pendant, estimate_excursions, estimate_return_time, verify_theorems, Execution,
    SimParams, VertexId,
};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn return_time_trials(c: &mut Criterion) {
    let net = complete(16);
    let z = VertexId::from("0");
    let mut group = c.benchmark_group("estimate_return_time/k16");
    for (name, exec) in MODES {
        let params = SimParams::new(100_000, 7).with_execution(exec);
        group.bench_function(name, |b| {
            b.iter(|| estimate_return_time(black_box(&net), &z, &params).unwrap())
        });
    }
    group.finish();
}

fn excursion_trials(c: &mut Criterion) {
    let net = RandomNetworks::default()
        .with_size(40, 40)
        .sample(&mut WalkRng::new(3));
    let aug = attach_pendant(&net, &VertexId::from("v0"), 1.0).unwrap();
    let mut group = c.benchmark_group("estimate_excursions/n40");
    for (name, exec) in MODES {
        let params = SimParams::new(50_000, 7).with_execution(exec);
        group.bench_function(name, |b| {
            b.iter(|| estimate_excursions(black_box(&aug), &params).unwrap())
        });
    }
    group.finish();
}

fn verification(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_theorems");
    group.sample_size(10);
    for n in [12, 48] {
        let net = RandomNetworks::default()
            .with_size(n, n)
            .sample(&mut WalkRng::new(n as u64));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &net, |b, net| {
                b.iter(|| verify_theorems(black_box(net), 1e-9, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, return_time_trials, excursion_trials, verification);
criterion_main!(benches);
