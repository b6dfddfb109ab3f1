//! Small density-matrix reference implementation.
//!
//! Used as an independent check that trajectory-averaged noise reproduces
//! the exact Kraus channels. Dense O(4^n) representation, intended for
//! n <= 2 in tests; the main simulation path never touches this.

use num_complex::Complex64;

use crate::error::Result;
use crate::sim::noise::{CircuitExecution, NoiseSpec};
use crate::sim::{GateInstr, NoiseKind, Pauli, StateVector};

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    /// Row-major 2^n x 2^n matrix.
    rho: Vec<Complex64>,
}

impl DensityMatrix {
    /// Pure state |0...0><0...0|.
    pub fn new(n: usize) -> Self {
        assert!(n <= 6, "density matrix over 6 qubits");
        let dim = 1 << n;
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        rho[0] = Complex64::new(1.0, 0.0);
        Self { n, dim, rho }
    }

    pub fn from_statevector(state: &StateVector) -> Self {
        let dim = state.amplitudes().len();
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                rho[r * dim + c] = state.amplitudes()[r] * state.amplitudes()[c].conj();
            }
        }
        Self {
            n: state.num_qubits(),
            dim,
            rho,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Full-dimension matrix of a gate, built column by column through the
    /// statevector simulator so both paths share one gate definition.
    fn full_unitary(&self, apply: impl Fn(&mut StateVector)) -> Vec<Complex64> {
        let mut u = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for col in 0..self.dim {
            let mut basis = StateVector::basis(self.n, col as u64);
            apply(&mut basis);
            for row in 0..self.dim {
                u[row * self.dim + col] = basis.amplitudes()[row];
            }
        }
        u
    }

    fn conjugate_by(&mut self, u: &[Complex64]) {
        let dim = self.dim;
        // tmp = U * rho
        let mut tmp = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let urk = u[r * dim + k];
                if urk.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    tmp[r * dim + c] += urk * self.rho[k * dim + c];
                }
            }
        }
        // rho = tmp * U^dagger
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += tmp[r * dim + k] * u[c * dim + k].conj();
                }
                out[r * dim + c] = acc;
            }
        }
        self.rho = out;
    }

    pub fn apply_gate(&mut self, gate: &GateInstr, theta: &[f64]) -> Result<()> {
        // Validate once on a scratch state, then conjugate.
        let mut scratch = StateVector::new(self.n);
        scratch.apply(gate, theta)?;
        let u = self.full_unitary(|sv| {
            sv.apply(gate, theta).expect("validated gate");
        });
        self.conjugate_by(&u);
        Ok(())
    }

    /// Exact single-qubit Pauli channel on qubit `q`.
    pub fn apply_channel(&mut self, kind: NoiseKind, p: f64, q: usize) {
        let branches: Vec<(f64, Pauli)> = match kind {
            NoiseKind::BitFlip => vec![(p, Pauli::X)],
            NoiseKind::PhaseFlip => vec![(p, Pauli::Z)],
            NoiseKind::Depolarizing => {
                vec![(p / 3.0, Pauli::X), (p / 3.0, Pauli::Y), (p / 3.0, Pauli::Z)]
            }
        };
        let keep: f64 = 1.0 - branches.iter().map(|(w, _)| w).sum::<f64>();
        let mut mixed: Vec<Complex64> = self.rho.iter().map(|&v| v * keep).collect();
        for (weight, pauli) in branches {
            let u = self.full_unitary(|sv| sv.apply_pauli(pauli, q));
            let mut branch = self.clone();
            branch.conjugate_by(&u);
            for (m, b) in mixed.iter_mut().zip(branch.rho.iter()) {
                *m += *b * weight;
            }
        }
        self.rho = mixed;
    }

    /// Diagonal of rho: exact measurement probabilities.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        (0..self.dim).map(|d| self.rho[d * self.dim + d].re).collect()
    }
}

/// Exact noisy output distribution of a circuit execution, channel form.
pub fn exact_noisy_probabilities(
    exec: &CircuitExecution<'_>,
    spec: &NoiseSpec,
) -> Result<Vec<f64>> {
    let mut rho = DensityMatrix::new(exec.n);
    for gate in &exec.gates[..exec.encoding_len] {
        rho.apply_gate(gate, exec.theta)?;
    }
    if spec.placement.after_encoding() {
        for q in 0..exec.n {
            rho.apply_channel(spec.kind, spec.probability, q);
        }
    }
    for gate in &exec.gates[exec.encoding_len..] {
        rho.apply_gate(gate, exec.theta)?;
    }
    if spec.placement.before_measurement() {
        for q in 0..exec.n {
            rho.apply_channel(spec.kind, spec.probability, q);
        }
    }
    Ok(rho.basis_probabilities())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn pure_state_round_trip() {
        let mut sv = StateVector::new(2);
        sv.apply(&GateInstr::rx(0, 0.7), &[]).unwrap();
        sv.apply(&GateInstr::cnot(0, 1), &[]).unwrap();
        let rho = DensityMatrix::from_statevector(&sv);
        let probs = rho.basis_probabilities();
        for (a, b) in probs.iter().zip(sv.probabilities()) {
            assert_abs_diff_eq!(a, &b, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_bitflip_channel_moves_population() {
        let mut rho = DensityMatrix::new(1);
        rho.apply_channel(NoiseKind::BitFlip, 1.0, 0);
        let probs = rho.basis_probabilities();
        assert_abs_diff_eq!(probs[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(probs[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn depolarizing_on_plus_state_damps_coherence() {
        // Channel with p acting on |+><+| keeps diagonal uniform.
        let mut sv = StateVector::new(1);
        sv.apply(
            &GateInstr::fixed(crate::sim::GateKind::Ry, vec![0], vec![PI / 2.0]),
            &[],
        )
        .unwrap();
        let mut rho = DensityMatrix::from_statevector(&sv);
        rho.apply_channel(NoiseKind::Depolarizing, 0.3, 0);
        let probs = rho.basis_probabilities();
        assert_abs_diff_eq!(probs[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(probs[1], 0.5, epsilon = 1e-12);
    }
}
