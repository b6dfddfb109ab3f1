//! Shared fixtures for the criterion benchmarks.

use dqas_core::ansatz::{
    assemble_circuit, make_pool, ArchAssignment, AssembledCircuit, PlaceholderCircuit, PoolName,
};
use dqas_core::jssp::{
    brute_force_oracle, build_qubo, desk_instance, presolve, EnergyBounds, QuboProblem,
};

/// The presolved five-variable desk problem with its exact bounds.
pub fn desk_problem() -> (QuboProblem, EnergyBounds) {
    let d5 = desk_instance();
    let qubo = presolve(&d5, &build_qubo(&d5, &d5.default_weights()).unwrap()).unwrap();
    let bounds = brute_force_oracle(&qubo).unwrap();
    (qubo, bounds)
}

/// A representative searched-style circuit: cz chain plus two rotation
/// layers over five qubits.
pub fn sample_circuit() -> AssembledCircuit {
    let pool = make_pool(PoolName::Op1, 5).unwrap();
    let pc = PlaceholderCircuit::standard(5, 4, 1).unwrap();
    let id = pool
        .candidates()
        .iter()
        .position(|c| c.kind == dqas_core::sim::GateKind::Identity)
        .unwrap();
    let arch = ArchAssignment(vec![6, 0, 3, id]);
    assemble_circuit(&pc, &pool, &arch).unwrap()
}
