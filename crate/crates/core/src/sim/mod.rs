//! Exact dense statevector simulation.
//!
//! States live in the computational basis with qubit `q` stored at bit
//! `1 << q` of the amplitude index. Rotation gates follow the
//! `exp(-i * angle * P / 2)` convention; parameter-shift gradients depend
//! on this and tests pin it down.

mod density;
mod noise;
mod sampler;

pub use density::{exact_noisy_probabilities, DensityMatrix};
pub use noise::{
    apply_noise, noisy_trajectory, sample_noisy_bitstrings, CircuitExecution, NoiseKind,
    NoisePlacement, NoiseSpec,
};
pub use sampler::{measurement_distribution, sample_bitstrings, sample_with_rng};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const NORM_TOLERANCE: f64 = 1e-10;

/// Gate vocabulary understood by the simulator and the operation pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U3,
    Cnot,
    Cz,
    Identity,
}

impl GateKind {
    /// Rotation angles the gate consumes.
    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::U3 => 3,
            GateKind::Cnot | GateKind::Cz | GateKind::Identity => 0,
        }
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(self, GateKind::Cnot | GateKind::Cz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::U3 => "u3",
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::Identity => "identity",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "u3" => GateKind::U3,
            "cnot" => GateKind::Cnot,
            "cz" => GateKind::Cz,
            "identity" => GateKind::Identity,
            other => return Err(Error::InvalidGate(format!("unknown gate kind `{other}`"))),
        })
    }
}

/// One gate application.
///
/// Angles are either fixed (`params`) or read from the global theta vector
/// through `param_slots`; a gate never mixes the two.
#[derive(Debug, Clone, PartialEq)]
pub struct GateInstr {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub params: Vec<f64>,
    pub param_slots: Vec<usize>,
}

impl GateInstr {
    pub fn fixed(kind: GateKind, targets: Vec<usize>, params: Vec<f64>) -> Self {
        Self {
            kind,
            targets,
            params,
            param_slots: Vec::new(),
        }
    }

    pub fn slotted(kind: GateKind, targets: Vec<usize>, param_slots: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            params: Vec::new(),
            param_slots,
        }
    }

    pub fn rx(target: usize, angle: f64) -> Self {
        Self::fixed(GateKind::Rx, vec![target], vec![angle])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::fixed(GateKind::Cnot, vec![control, target], Vec::new())
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::fixed(GateKind::Cz, vec![a, b], Vec::new())
    }

    pub fn identity(target: usize) -> Self {
        Self::fixed(GateKind::Identity, vec![target], Vec::new())
    }

    fn validate(&self, n: usize) -> Result<()> {
        for &t in &self.targets {
            if t >= n {
                return Err(Error::QubitOutOfRange { qubit: t, n });
            }
        }
        if self.kind.is_two_qubit() && (self.targets.len() != 2 || self.targets[0] == self.targets[1])
        {
            return Err(Error::InvalidGate(format!(
                "{} needs two distinct targets, got {:?}",
                self.kind.name(),
                self.targets
            )));
        }
        Ok(())
    }

    /// Resolve angles against the global theta vector.
    pub fn resolve_params(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let want = self.kind.param_count();
        if want == 0 {
            return Ok(Vec::new());
        }
        if !self.param_slots.is_empty() {
            if self.param_slots.len() != want {
                return Err(Error::InvalidGate(format!(
                    "{} expects {} parameter slots, got {}",
                    self.kind.name(),
                    want,
                    self.param_slots.len()
                )));
            }
            self.param_slots
                .iter()
                .map(|&s| {
                    theta.get(s).copied().ok_or(Error::UnresolvedParamSlot {
                        slot: s,
                        len: theta.len(),
                    })
                })
                .collect()
        } else {
            if self.params.len() != want {
                return Err(Error::InvalidGate(format!(
                    "{} expects {} angles, got {}",
                    self.kind.name(),
                    want,
                    self.params.len()
                )));
            }
            Ok(self.params.clone())
        }
    }
}

/// 2x2 unitary for a resolved single-qubit gate.
pub fn single_qubit_matrix(kind: GateKind, angles: &[f64]) -> [[Complex64; 2]; 2] {
    let i = Complex64::i();
    match kind {
        GateKind::Rx => {
            let (s, c) = (angles[0] / 2.0).sin_cos();
            [
                [Complex64::new(c, 0.0), -i * s],
                [-i * s, Complex64::new(c, 0.0)],
            ]
        }
        GateKind::Ry => {
            let (s, c) = (angles[0] / 2.0).sin_cos();
            [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ]
        }
        GateKind::Rz => {
            let half = angles[0] / 2.0;
            [
                [Complex64::from_polar(1.0, -half), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, half)],
            ]
        }
        GateKind::U3 => {
            let (theta, phi, lam) = (angles[0], angles[1], angles[2]);
            let (s, c) = (theta / 2.0).sin_cos();
            [
                [
                    Complex64::new(c, 0.0),
                    -Complex64::from_polar(1.0, lam) * s,
                ],
                [
                    Complex64::from_polar(1.0, phi) * s,
                    Complex64::from_polar(1.0, phi + lam) * c,
                ],
            ]
        }
        GateKind::Identity => [
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ],
        GateKind::Cnot | GateKind::Cz => unreachable!("two-qubit kind in single-qubit path"),
    }
}

/// Dense state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on `n` qubits.
    pub fn new(n: usize) -> Self {
        assert!(n <= 24, "statevector over 24 qubits");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// Basis state |index>.
    pub fn basis(n: usize, index: u64) -> Self {
        let mut sv = Self::new(n);
        sv.amps[0] = Complex64::new(0.0, 0.0);
        sv.amps[index as usize] = Complex64::new(1.0, 0.0);
        sv
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Measurement probabilities over basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// If the state is a computational basis state (up to phase), return
    /// its index.
    pub fn as_basis_state(&self, tol: f64) -> Option<u64> {
        let mut found = None;
        for (idx, amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() > tol {
                if found.is_some() {
                    return None;
                }
                found = Some(idx as u64);
            }
        }
        found.filter(|&idx| (self.amps[idx as usize].norm_sqr() - 1.0).abs() < tol)
    }

    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let step = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for low in base..base + step {
                let high = low + step;
                let a = self.amps[low];
                let b = self.amps[high];
                self.amps[low] = m[0][0] * a + m[0][1] * b;
                self.amps[high] = m[1][0] * a + m[1][1] * b;
            }
            base += step << 1;
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for idx in 0..self.amps.len() {
            if idx & cmask != 0 && idx & tmask == 0 {
                self.amps.swap(idx, idx | tmask);
            }
        }
    }

    fn apply_cz(&mut self, a: usize, b: usize) {
        let mask = (1usize << a) | (1usize << b);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp = -*amp;
            }
        }
    }

    /// Apply one gate, resolving slot-bound angles from `theta`.
    pub fn apply(&mut self, gate: &GateInstr, theta: &[f64]) -> Result<()> {
        gate.validate(self.n)?;
        match gate.kind {
            GateKind::Identity => {}
            GateKind::Cnot => self.apply_cnot(gate.targets[0], gate.targets[1]),
            GateKind::Cz => self.apply_cz(gate.targets[0], gate.targets[1]),
            kind => {
                let angles = gate.resolve_params(theta)?;
                self.apply_single(gate.targets[0], single_qubit_matrix(kind, &angles));
            }
        }
        Ok(())
    }

    /// Apply a raw Pauli operator (used by the noise channels).
    pub fn apply_pauli(&mut self, pauli: Pauli, q: usize) {
        let i = Complex64::i();
        match pauli {
            Pauli::X => {
                let mask = 1usize << q;
                for idx in 0..self.amps.len() {
                    if idx & mask == 0 {
                        self.amps.swap(idx, idx | mask);
                    }
                }
            }
            Pauli::Y => {
                let mask = 1usize << q;
                for idx in 0..self.amps.len() {
                    if idx & mask == 0 {
                        let hi = idx | mask;
                        let a = self.amps[idx];
                        let b = self.amps[hi];
                        self.amps[idx] = -i * b;
                        self.amps[hi] = i * a;
                    }
                }
            }
            Pauli::Z => {
                let mask = 1usize << q;
                for (idx, amp) in self.amps.iter_mut().enumerate() {
                    if idx & mask != 0 {
                        *amp = -*amp;
                    }
                }
            }
        }
    }
}

/// Pauli operators inserted by the noise channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Run `gates` in order from |0...0> on `n` qubits.
pub fn run_circuit(gates: &[GateInstr], theta: &[f64], n: usize) -> Result<StateVector> {
    let mut state = StateVector::new(n);
    for gate in gates {
        state.apply(gate, theta)?;
    }
    debug_assert!((state.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
    Ok(state)
}

/// Dump amplitudes as `index,re,im` CSV lines (debug aid).
pub fn write_amplitudes_csv<W: std::io::Write>(state: &StateVector, mut w: W) -> std::io::Result<()> {
    writeln!(w, "index,re,im")?;
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        writeln!(w, "{},{},{}", idx, amp.re, amp.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn gate_unitary_2x2(kind: GateKind, angles: &[f64]) -> [[Complex64; 2]; 2] {
        single_qubit_matrix(kind, angles)
    }

    #[test]
    fn rx_pi_flips_zero() {
        let mut sv = StateVector::new(1);
        sv.apply(&GateInstr::rx(0, PI), &[]).unwrap();
        assert_abs_diff_eq!(sv.amplitude(1).norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sv.amplitude(0).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_leaves_state() {
        let mut sv = StateVector::new(2);
        sv.apply(&GateInstr::rx(0, 0.3), &[]).unwrap();
        let before = sv.clone();
        sv.apply(&GateInstr::identity(1), &[]).unwrap();
        assert_eq!(sv, before);
    }

    #[test]
    fn cnot_truth_table() {
        // |10> in text form: qubit 0 set, qubit 1 clear -> index 0b01.
        let mut sv = StateVector::basis(2, 0b01);
        sv.apply(&GateInstr::cnot(0, 1), &[]).unwrap();
        assert_abs_diff_eq!(sv.amplitude(0b11).norm(), 1.0, epsilon = 1e-12);

        let mut sv = StateVector::basis(2, 0b10); // |01>: control clear
        sv.apply(&GateInstr::cnot(0, 1), &[]).unwrap();
        assert_abs_diff_eq!(sv.amplitude(0b10).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rz_composes_additively() {
        let theta = [0.7, 1.1];
        let mut a = StateVector::new(1);
        a.apply(&GateInstr::rx(0, 1.3), &[]).unwrap();
        let mut b = a.clone();

        a.apply(&GateInstr::slotted(GateKind::Rz, vec![0], vec![0]), &theta)
            .unwrap();
        a.apply(&GateInstr::slotted(GateKind::Rz, vec![0], vec![1]), &theta)
            .unwrap();
        b.apply(&GateInstr::fixed(GateKind::Rz, vec![0], vec![0.7 + 1.1]), &[])
            .unwrap();
        for idx in 0..2 {
            assert_abs_diff_eq!(a.amplitude(idx).re, b.amplitude(idx).re, epsilon = 1e-12);
            assert_abs_diff_eq!(a.amplitude(idx).im, b.amplitude(idx).im, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotations_at_zero_are_identity() {
        for kind in [GateKind::Rx, GateKind::Ry, GateKind::Rz] {
            let m = gate_unitary_2x2(kind, &[0.0]);
            assert_abs_diff_eq!(m[0][0].re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m[1][1].re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m[0][1].norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m[1][0].norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotations_at_two_pi_are_minus_identity() {
        for kind in [GateKind::Rx, GateKind::Ry, GateKind::Rz] {
            let m = gate_unitary_2x2(kind, &[2.0 * PI]);
            assert_abs_diff_eq!(m[0][0].re, -1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m[1][1].re, -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn unitarity_of_random_single_qubit_gates() {
        let angles = [0.3, -1.2, 2.5];
        for kind in [GateKind::Rx, GateKind::Ry, GateKind::Rz, GateKind::U3] {
            let m = gate_unitary_2x2(kind, &angles[..kind.param_count()]);
            // U * U^dagger == I
            for r in 0..2 {
                for c in 0..2 {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for k in 0..2 {
                        sum += m[r][k] * m[c][k].conj();
                    }
                    let expected = if r == c { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(sum.re, expected, epsilon = 1e-12);
                    assert_abs_diff_eq!(sum.im, 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn empty_circuit_is_ground_state() {
        let sv = run_circuit(&[], &[], 3).unwrap();
        assert_abs_diff_eq!(sv.amplitude(0).norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unresolved_slot_is_an_error() {
        let gate = GateInstr::slotted(GateKind::Ry, vec![0], vec![3]);
        let mut sv = StateVector::new(1);
        assert!(matches!(
            sv.apply(&gate, &[0.1]),
            Err(Error::UnresolvedParamSlot { slot: 3, len: 1 })
        ));
    }

    #[test]
    fn out_of_range_target_is_an_error() {
        let mut sv = StateVector::new(2);
        assert!(matches!(
            sv.apply(&GateInstr::rx(5, 0.1), &[]),
            Err(Error::QubitOutOfRange { qubit: 5, n: 2 })
        ));
    }

    #[test]
    fn basis_state_detection() {
        let sv = StateVector::basis(3, 5);
        assert_eq!(sv.as_basis_state(1e-12), Some(5));
        let mut sup = StateVector::new(1);
        sup.apply(&GateInstr::fixed(GateKind::Ry, vec![0], vec![PI / 2.0]), &[])
            .unwrap();
        assert_eq!(sup.as_basis_state(1e-12), None);
    }
}
