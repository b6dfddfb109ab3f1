//! Benchmarks for the hot paths: gate application, energy evaluation,
//! enumeration, CVaR estimation, and one search epoch.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use dqas_bench::{desk_problem, sample_circuit};
use dqas_core::ansatz::{make_pool, PlaceholderCircuit, PoolName};
use dqas_core::dqas::{cvar_energy, CvarConfig, SearchSettings, Trainer};
use dqas_core::jssp::brute_force_oracle;
use dqas_core::sim::{run_circuit, GateInstr, GateKind, StateVector};

fn bench_gate_application(c: &mut Criterion) {
    let mut group = c.benchmark_group("statevector");
    for n in [5usize, 10, 15] {
        let ry = GateInstr::fixed(GateKind::Ry, vec![n / 2], vec![0.73]);
        let cnot = GateInstr::cnot(0, n - 1);
        group.bench_function(format!("ry_{n}q"), |b| {
            b.iter_batched(
                || StateVector::new(n),
                |mut sv| sv.apply(black_box(&ry), &[]).unwrap(),
                BatchSize::SmallInput,
            )
        });
        group.bench_function(format!("cnot_{n}q"), |b| {
            b.iter_batched(
                || StateVector::new(n),
                |mut sv| sv.apply(black_box(&cnot), &[]).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_circuit_run(c: &mut Criterion) {
    let circuit = sample_circuit();
    let theta: Vec<f64> = (0..circuit.param_count).map(|i| 0.1 * i as f64).collect();
    c.bench_function("run_sample_circuit_5q", |b| {
        b.iter(|| run_circuit(black_box(&circuit.gates), black_box(&theta), circuit.n).unwrap())
    });
}

fn bench_energy_paths(c: &mut Criterion) {
    let (qubo, _) = desk_problem();
    c.bench_function("qubo_energy_32_states", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for idx in 0..32u64 {
                acc += qubo.energy_of_index(black_box(idx));
            }
            acc
        })
    });
    c.bench_function("brute_force_oracle_5vars", |b| {
        b.iter(|| brute_force_oracle(black_box(&qubo)).unwrap())
    });
}

fn bench_cvar(c: &mut Criterion) {
    let (qubo, _) = desk_problem();
    let circuit = sample_circuit();
    let theta: Vec<f64> = (0..circuit.param_count).map(|i| 0.05 * i as f64).collect();
    let cfg = CvarConfig::new(1000, 0.25).unwrap();
    c.bench_function("cvar_energy_1000_shots", |b| {
        b.iter(|| cvar_energy(black_box(&circuit), &theta, &qubo, &cfg, None, 42).unwrap())
    });
}

fn bench_search_epoch(c: &mut Criterion) {
    let (qubo, bounds) = desk_problem();
    let pool = make_pool(PoolName::Op1, 5).unwrap();
    let pc = PlaceholderCircuit::standard(5, 4, 1).unwrap();
    let trainer = Trainer {
        pc: &pc,
        pool: &pool,
        qubo: &qubo,
        bounds: &bounds,
        settings: SearchSettings {
            epochs: 1,
            batch_size: 8,
            cvar: CvarConfig::new(1000, 1.0).unwrap(),
            lr_alpha: 0.3,
            lr_theta: 0.2,
            baseline_subtraction: true,
            theta_init_spread: 1.0,
            noise: None,
            seed: 7,
        },
    };
    c.bench_function("search_epoch_batch8", |b| {
        b.iter_batched(
            || trainer.init_state(),
            |mut state| trainer.run_epoch(black_box(&mut state)).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_gate_application,
    bench_circuit_run,
    bench_energy_paths,
    bench_cvar,
    bench_search_epoch
);
criterion_main!(benches);
