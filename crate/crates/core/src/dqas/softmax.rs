//! The factorized categorical architecture distribution.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ansatz::ArchAssignment;

/// Row-wise stable softmax of the logit matrix.
pub fn arch_probabilities(alpha: &[Vec<f64>]) -> Vec<Vec<f64>> {
    alpha
        .iter()
        .map(|row| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
            let sum: f64 = exps.iter().sum();
            exps.into_iter().map(|e| e / sum).collect()
        })
        .collect()
}

/// Shannon entropy of one probability row, in nats.
pub fn row_entropy(row: &[f64]) -> f64 {
    -row.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Joint probability of an assignment under the factorized model.
pub fn arch_probability(probs: &[Vec<f64>], arch: &ArchAssignment) -> f64 {
    probs
        .iter()
        .zip(&arch.0)
        .map(|(row, &c)| row[c])
        .product()
}

fn draw_categorical<R: Rng>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.len() - 1
}

/// One draw per placeholder row.
pub fn sample_arch<R: Rng>(probs: &[Vec<f64>], rng: &mut R) -> ArchAssignment {
    ArchAssignment(probs.iter().map(|row| draw_categorical(row, rng)).collect())
}

/// A batch of i.i.d. architecture draws.
pub fn sample_batch<R: Rng>(alpha: &[Vec<f64>], batch: usize, rng: &mut R) -> Vec<ArchAssignment> {
    let probs = arch_probabilities(alpha);
    (0..batch).map(|_| sample_arch(&probs, rng)).collect()
}

/// Seeded convenience form of [`sample_batch`].
pub fn sample_batch_seeded(alpha: &[Vec<f64>], batch: usize, seed: u64) -> Vec<ArchAssignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_batch(alpha, batch, &mut rng)
}
