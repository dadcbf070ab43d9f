use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gridcut_bench::{default_pulse, ring_layout};
use gridcut_core::rydsim::{ConstantHamiltonian, RydbergSystem};
use gridcut_core::{SimConfig, StateVector};

fn strang(c: &mut Criterion) {
    let pulse = default_pulse();
    let mut group = c.benchmark_group("strang_4us");
    group.sample_size(10);
    for n in [6usize, 9, 12] {
        let sys = RydbergSystem::new(&ring_layout(n, 6.5), &SimConfig::default()).unwrap();
        let zero = StateVector::zero(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| sys.evolve(black_box(&zero), &pulse, 1e-3, 0.0, 4.0).unwrap())
        });
    }
    group.finish();
}

fn chebyshev(c: &mut Criterion) {
    let mut group = c.benchmark_group("chebyshev_1us");
    for n in [9usize, 12] {
        let sys = RydbergSystem::new(&ring_layout(n, 12.0), &SimConfig::default()).unwrap();
        let table = sys.diagonal(None).unwrap();
        let h = ConstantHamiltonian::new(&table, 5.0, 2.0, 0.0).unwrap();
        let start = StateVector::plus(n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let mut psi = start.clone();
                h.propagate(&mut psi, 1.0).unwrap();
                psi
            })
        });
    }
    group.finish();
}

criterion_group!(benches, strang, chebyshev);
criterion_main!(benches);
