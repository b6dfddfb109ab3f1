//! Stochastic Pauli noise with Monte-Carlo trajectory semantics.
//!
//! Noise is inserted at the "ends" of the qubits: right after the encoding
//! block and/or right before measurement. Each insertion point acts
//! independently per qubit: with probability `p` a Pauli is applied
//! (X for bitflip, Z for phaseflip, uniform X/Y/Z for depolarizing).
//! Averaged over trajectories this reproduces the corresponding Kraus
//! channel; the density-matrix reference in [`super::DensityMatrix`]
//! pins that down in tests.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::sim::sampler::{measurement_distribution, MeasurementDistribution};
use crate::sim::{GateInstr, Pauli, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    BitFlip,
    PhaseFlip,
    Depolarizing,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::BitFlip => "bitflip",
            NoiseKind::PhaseFlip => "phaseflip",
            NoiseKind::Depolarizing => "depolarizing",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "bitflip" => NoiseKind::BitFlip,
            "phaseflip" => NoiseKind::PhaseFlip,
            "depolarizing" => NoiseKind::Depolarizing,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown noise kind `{other}`"
                )))
            }
        })
    }

    fn draw_pauli<R: Rng>(self, rng: &mut R) -> Pauli {
        match self {
            NoiseKind::BitFlip => Pauli::X,
            NoiseKind::PhaseFlip => Pauli::Z,
            NoiseKind::Depolarizing => match rng.gen_range(0..3u8) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePlacement {
    AfterEncoding,
    BeforeMeasurement,
    Both,
}

impl NoisePlacement {
    pub fn name(self) -> &'static str {
        match self {
            NoisePlacement::AfterEncoding => "after_encoding",
            NoisePlacement::BeforeMeasurement => "before_measurement",
            NoisePlacement::Both => "both",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "after_encoding" => NoisePlacement::AfterEncoding,
            "before_measurement" => NoisePlacement::BeforeMeasurement,
            "both" => NoisePlacement::Both,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown noise placement `{other}`"
                )))
            }
        })
    }

    pub fn after_encoding(self) -> bool {
        matches!(self, NoisePlacement::AfterEncoding | NoisePlacement::Both)
    }

    pub fn before_measurement(self) -> bool {
        matches!(self, NoisePlacement::BeforeMeasurement | NoisePlacement::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub probability: f64,
    pub placement: NoisePlacement,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, probability: f64, placement: NoisePlacement) -> Result<Self> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::InvalidConfig(format!(
                "noise probability {probability} outside [0, 1]"
            )));
        }
        Ok(Self {
            kind,
            probability,
            placement,
        })
    }

    /// Parse the CLI form `kind:prob:placement`, e.g. `bitflip:0.2:both`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidConfig(format!(
                "noise spec `{text}` is not kind:prob:placement"
            )));
        }
        let kind = NoiseKind::parse(parts[0])?;
        let prob: f64 = parts[1]
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad noise probability `{}`", parts[1])))?;
        let placement = NoisePlacement::parse(parts[2])?;
        Self::new(kind, prob, placement)
    }

    /// Probability that one noise event flips the measured bit.
    fn classical_flip_probability(&self) -> f64 {
        match self.kind {
            NoiseKind::BitFlip => self.probability,
            NoiseKind::PhaseFlip => 0.0,
            // X and Y flip, Z does not.
            NoiseKind::Depolarizing => self.probability * 2.0 / 3.0,
        }
    }
}

/// A circuit plus the split point between its fixed encoding prefix and
/// the parameterized body, which is where noise can be inserted.
#[derive(Debug, Clone, Copy)]
pub struct CircuitExecution<'a> {
    pub gates: &'a [GateInstr],
    pub encoding_len: usize,
    pub theta: &'a [f64],
    pub n: usize,
}

impl<'a> CircuitExecution<'a> {
    pub fn new(gates: &'a [GateInstr], encoding_len: usize, theta: &'a [f64], n: usize) -> Self {
        debug_assert!(encoding_len <= gates.len());
        Self {
            gates,
            encoding_len,
            theta,
            n,
        }
    }
}

fn noise_layer<R: Rng>(state: &mut StateVector, spec: &NoiseSpec, rng: &mut R) {
    for q in 0..state.num_qubits() {
        if rng.gen::<f64>() < spec.probability {
            let pauli = spec.kind.draw_pauli(rng);
            state.apply_pauli(pauli, q);
        }
    }
}

/// One noisy trajectory with a caller-owned RNG.
pub fn noisy_trajectory<R: Rng>(
    exec: &CircuitExecution<'_>,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<StateVector> {
    let mut state = StateVector::new(exec.n);
    for gate in &exec.gates[..exec.encoding_len] {
        state.apply(gate, exec.theta)?;
    }
    if spec.placement.after_encoding() {
        noise_layer(&mut state, spec, rng);
    }
    for gate in &exec.gates[exec.encoding_len..] {
        state.apply(gate, exec.theta)?;
    }
    if spec.placement.before_measurement() {
        noise_layer(&mut state, spec, rng);
    }
    Ok(state)
}

/// Run one seeded Monte-Carlo noise trajectory of a circuit execution.
pub fn apply_noise(exec: &CircuitExecution<'_>, spec: &NoiseSpec, seed: u64) -> Result<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    noisy_trajectory(exec, spec, &mut rng)
}

/// Sample `shots` measurement outcomes, one independent trajectory each.
///
/// When the post-encoding state is a computational basis state (the rx(pi)
/// encoding always is), end-point noise collapses to classical bit flips:
/// the after-encoding layer permutes the starting basis state and the
/// before-measurement layer flips bits of the sampled outcome. The body
/// is then simulated once per distinct starting state instead of once per
/// shot. This is distribution-identical to simulating every trajectory;
/// tests compare both paths and the density-matrix reference.
pub fn sample_noisy_bitstrings(
    exec: &CircuitExecution<'_>,
    spec: &NoiseSpec,
    shots: usize,
    seed: u64,
) -> Result<Vec<Bitstring>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if spec.probability == 0.0 {
        let state = crate::sim::run_circuit(exec.gates, exec.theta, exec.n)?;
        return Ok(crate::sim::sample_with_rng(&state, shots, &mut rng));
    }

    let mut encoded = StateVector::new(exec.n);
    for gate in &exec.gates[..exec.encoding_len] {
        encoded.apply(gate, exec.theta)?;
    }

    let Some(base_index) = encoded.as_basis_state(1e-12) else {
        // General encoding: fall back to one full trajectory per shot.
        let mut out = Vec::with_capacity(shots);
        for _ in 0..shots {
            let state = noisy_trajectory(exec, spec, &mut rng)?;
            let sample = crate::sim::sample_with_rng(&state, 1, &mut rng);
            out.extend(sample);
        }
        return Ok(out);
    };

    let flip_p = spec.classical_flip_probability();
    let mut body_dists: HashMap<u64, MeasurementDistribution> = HashMap::new();
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let mut start = base_index;
        if spec.placement.after_encoding() {
            for q in 0..exec.n {
                if rng.gen::<f64>() < flip_p {
                    start ^= 1 << q;
                }
            }
        }
        let dist = match body_dists.entry(start) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                let mut state = StateVector::basis(exec.n, start);
                for gate in &exec.gates[exec.encoding_len..] {
                    state.apply(gate, exec.theta)?;
                }
                e.insert(measurement_distribution(&state))
            }
        };
        let mut sample = dist.draw(&mut rng);
        if spec.placement.before_measurement() {
            for q in 0..exec.n {
                if rng.gen::<f64>() < flip_p {
                    sample.set_bit(q, !sample.bit(q));
                }
            }
        }
        out.push(sample);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_probability_is_noiseless() {
        let gates = vec![GateInstr::rx(0, PI), GateInstr::rx(1, PI)];
        let exec = CircuitExecution::new(&gates, 2, &[], 2);
        let spec = NoiseSpec::new(NoiseKind::BitFlip, 0.0, NoisePlacement::Both).unwrap();
        let noisy = apply_noise(&exec, &spec, 3).unwrap();
        let clean = crate::sim::run_circuit(&gates, &[], 2).unwrap();
        assert_eq!(noisy.probabilities(), clean.probabilities());
    }

    #[test]
    fn certain_bitflip_flips_every_qubit() {
        let gates: Vec<GateInstr> = Vec::new();
        let exec = CircuitExecution::new(&gates, 0, &[], 2);
        let spec = NoiseSpec::new(NoiseKind::BitFlip, 1.0, NoisePlacement::BeforeMeasurement)
            .unwrap();
        let state = apply_noise(&exec, &spec, 5).unwrap();
        assert!((state.amplitude(0b11).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bitflip_rate_matches_bernoulli() {
        let gates: Vec<GateInstr> = Vec::new();
        let exec = CircuitExecution::new(&gates, 0, &[], 1);
        let spec =
            NoiseSpec::new(NoiseKind::BitFlip, 0.2, NoisePlacement::BeforeMeasurement).unwrap();
        let shots = 100_000;
        let samples = sample_noisy_bitstrings(&exec, &spec, shots, 17).unwrap();
        let ones = samples.iter().filter(|b| b.bit(0)).count();
        let freq = ones as f64 / shots as f64;
        assert!((freq - 0.2).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn parse_cli_form() {
        let spec = NoiseSpec::parse("depolarizing:0.2:both").unwrap();
        assert_eq!(spec.kind, NoiseKind::Depolarizing);
        assert_eq!(spec.placement, NoisePlacement::Both);
        assert!(NoiseSpec::parse("bitflip:1.5:both").is_err());
        assert!(NoiseSpec::parse("bitflip:0.1").is_err());
    }

    #[test]
    fn fast_sampler_matches_trajectory_distribution() {
        // Non-trivial body after a basis-state encoding.
        let gates = vec![
            GateInstr::rx(0, PI),
            GateInstr::rx(1, PI),
            GateInstr::fixed(crate::sim::GateKind::Ry, vec![0], vec![0.9]),
            GateInstr::cnot(0, 1),
        ];
        let exec = CircuitExecution::new(&gates, 2, &[], 2);
        let spec = NoiseSpec::new(NoiseKind::Depolarizing, 0.2, NoisePlacement::Both).unwrap();

        let shots = 60_000;
        let fast = sample_noisy_bitstrings(&exec, &spec, shots, 23).unwrap();
        let mut fast_counts = [0usize; 4];
        for b in &fast {
            fast_counts[b.index() as usize] += 1;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut slow_counts = [0usize; 4];
        for _ in 0..shots {
            let state = noisy_trajectory(&exec, &spec, &mut rng).unwrap();
            let s = crate::sim::sample_with_rng(&state, 1, &mut rng)[0];
            slow_counts[s.index() as usize] += 1;
        }

        for idx in 0..4 {
            let f = fast_counts[idx] as f64 / shots as f64;
            let s = slow_counts[idx] as f64 / shots as f64;
            assert!((f - s).abs() < 0.012, "index {idx}: fast {f} slow {s}");
        }
    }
}
