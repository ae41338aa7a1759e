//! Compares the rayon-backed entry points against their sequential twins
//! on the three data-parallel workloads: protocol sweeps, Born-rule
//! sampling, and trajectory grids.
//!
//! Run with `cargo bench -p bitslab-core`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use bitslab_core::fulo::{
    integrate_grid, integrate_grid_seq, PacketPairModel, DEFAULT_HALF_DURATION,
    DEFAULT_PACKET_WIDTH, DEFAULT_SPLIT_SPEED,
};
use bitslab_core::protocol::{sweep, sweep_seq};
use bitslab_core::quantum::{
    bell_basis_xxyy, outcome_histogram, outcome_histogram_seq, TwoQubitState,
};
use bitslab_core::RandomStream;

fn bench_sweep(c: &mut Criterion) {
    let base = RandomStream::from_seed(1);
    let mut state_stream = base.fork(0);
    let states: Vec<TwoQubitState> = (0..4)
        .map(|_| TwoQubitState::random(&mut state_stream))
        .collect();

    let mut group = c.benchmark_group("sweep_4_states_x50_trials");
    group.bench_function("parallel", |b| {
        b.iter(|| sweep(black_box(&states), 50, &base).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| sweep_seq(black_box(&states), 50, &base).unwrap())
    });
    group.finish();
}

fn bench_histogram(c: &mut Criterion) {
    let basis = bell_basis_xxyy();
    let state = TwoQubitState::aa();
    let base = RandomStream::from_seed(2);

    let mut group = c.benchmark_group("born_histogram_20k_trials");
    group.bench_function("parallel", |b| {
        b.iter(|| outcome_histogram(black_box(&state), &basis, 20_000, &base).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| outcome_histogram_seq(black_box(&state), &basis, 20_000, &base).unwrap())
    });
    group.finish();
}

fn bench_trajectory_grid(c: &mut Criterion) {
    let model = PacketPairModel::new(
        0.5,
        DEFAULT_SPLIT_SPEED,
        DEFAULT_HALF_DURATION,
        DEFAULT_PACKET_WIDTH,
    )
    .unwrap();
    let z0s: Vec<f64> = (0..50).map(|k| -2.45 + 0.1 * k as f64).collect();
    let dt = DEFAULT_HALF_DURATION / 2000.0;

    let mut group = c.benchmark_group("trajectory_grid_50_points");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| integrate_grid(black_box(&model), &z0s, dt).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| integrate_grid_seq(black_box(&model), &z0s, dt).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_sweep, bench_histogram, bench_trajectory_grid);
criterion_main!(benches);
