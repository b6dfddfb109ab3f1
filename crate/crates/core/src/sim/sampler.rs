//! Measurement sampling from a statevector.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::Bitstring;
use crate::sim::StateVector;

/// Cumulative measurement distribution for repeated draws.
pub struct MeasurementDistribution {
    n: usize,
    cumulative: Vec<f64>,
}

impl MeasurementDistribution {
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Bitstring {
        let u: f64 = rng.gen::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let idx = self.cumulative.partition_point(|&c| c < u);
        Bitstring::from_index(idx.min(self.cumulative.len() - 1) as u64, self.n)
    }
}

/// Precompute the sampling table for a state.
pub fn measurement_distribution(state: &StateVector) -> MeasurementDistribution {
    let mut cumulative = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0;
    for amp in state.amplitudes() {
        acc += amp.norm_sqr();
        cumulative.push(acc);
    }
    MeasurementDistribution {
        n: state.num_qubits(),
        cumulative,
    }
}

/// Draw `shots` outcomes with a caller-owned RNG.
pub fn sample_with_rng<R: Rng>(state: &StateVector, shots: usize, rng: &mut R) -> Vec<Bitstring> {
    let dist = measurement_distribution(state);
    (0..shots).map(|_| dist.draw(rng)).collect()
}

/// Draw `shots` independent outcomes from |amplitude|^2, seeded.
pub fn sample_bitstrings(state: &StateVector, shots: usize, seed: u64) -> Vec<Bitstring> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(state, shots, &mut rng)
}
