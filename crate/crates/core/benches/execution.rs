use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use symvqc::circuit::build_brickwall;
use symvqc::exec::Execution;
use symvqc::gatelib::GateKind;
use symvqc::models::{xxz_hamiltonian, Boundary, XXZSpec};
use symvqc::numkit::StateVector;
use symvqc::rng::derive_seed;
use symvqc::simulator::haar_random_sector_state;
use symvqc::varopt::{maximize_fidelity, run_trials, EnergyTask, Estimator, OptimizerConfig};

fn strategies() -> [(&'static str, Execution); 2] {
    [("serial", Execution::Serial), ("parallel", Execution::parallel())]
}

fn trials(c: &mut Criterion) {
    let h = xxz_hamiltonian(&XXZSpec::new(4, 1.0, Boundary::Open).unwrap());
    let task = EnergyTask::new(build_brickwall(4, 2, GateKind::AGate).unwrap(), h, Estimator::Exact).unwrap();
    let cfg = OptimizerConfig {
        max_iterations: 300,
        ..Default::default()
    };
    let mut group = c.benchmark_group("vqe_trials");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| run_trials(black_box(&task), &cfg, 8, 1, 0.0, exec).unwrap())
        });
    }
    group.finish();
}

fn fidelity(c: &mut Criterion) {
    let circuit = build_brickwall(4, 2, GateKind::BGate).unwrap();
    let targets: Vec<StateVector> = (0..8)
        .map(|k| haar_random_sector_state(4, 2, derive_seed(1, 11, k)).unwrap())
        .collect();
    let cfg = OptimizerConfig {
        max_iterations: 1000,
        ..Default::default()
    };
    let mut group = c.benchmark_group("fidelity_batch");
    group.sample_size(10);
    for (name, exec) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, exec| {
            b.iter(|| maximize_fidelity(black_box(&circuit), &targets, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trials, fidelity);
criterion_main!(benches);
