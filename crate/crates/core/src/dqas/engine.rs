//! CVaR objective, gradients, and the super-circuit training loop.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{
    assemble_with_bank, ArchAssignment, AssembledCircuit, OperationPool, PlaceholderCircuit,
};
use crate::bits::Bitstring;
use crate::dqas::adam::{adam_step, AdamState};
use crate::dqas::softmax::{arch_probabilities, row_entropy, sample_batch_seeded};
use crate::error::{Error, Result};
use crate::jssp::{scale_energy, EnergyBounds, QuboProblem};
use crate::seeding::{self, derive_seed};
use crate::sim::{run_circuit, sample_bitstrings, sample_noisy_bitstrings, CircuitExecution, NoiseSpec};

use std::f64::consts::FRAC_PI_2;

/// Sampling budget and tail fraction of the CVaR estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvarConfig {
    pub shots: usize,
    pub cvar_fraction: f64,
}

impl CvarConfig {
    pub fn new(shots: usize, cvar_fraction: f64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if !(cvar_fraction > 0.0 && cvar_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cvar_fraction {cvar_fraction} outside (0, 1]"
            )));
        }
        Ok(Self {
            shots,
            cvar_fraction,
        })
    }

    /// Tail size `ceil(fraction * shots)`, at least 1.
    pub fn tail(&self) -> usize {
        ((self.cvar_fraction * self.shots as f64).ceil() as usize).clamp(1, self.shots)
    }
}

/// How circuit energies are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMode {
    /// Sample `shots` bitstrings and average the CVaR tail.
    Sampled(CvarConfig),
    /// Infinite-shot limit computed from the amplitudes.
    Exact { cvar_fraction: f64 },
}

/// Mean of the lowest `ceil(fraction * len)` energies.
pub fn cvar_from_energies(energies: &[f64], fraction: f64) -> Result<f64> {
    if energies.is_empty() {
        return Err(Error::InvalidConfig("no energies to aggregate".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "cvar_fraction {fraction} outside (0, 1]"
        )));
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = ((fraction * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[..tail].iter().sum::<f64>() / tail as f64)
}

fn energy_table(qubo: &QuboProblem, n: usize) -> Result<Vec<f64>> {
    if qubo.num_vars() != n {
        return Err(Error::ShapeMismatch {
            expected: qubo.num_vars(),
            got: n,
        });
    }
    qubo.energy_table()
}

fn sampled_energies(
    circuit: &AssembledCircuit,
    theta: &[f64],
    table: &[f64],
    cfg: &CvarConfig,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<Vec<(Bitstring, f64)>> {
    let samples = match noise {
        Some(spec) => {
            let exec =
                CircuitExecution::new(&circuit.gates, circuit.encoding_len, theta, circuit.n);
            sample_noisy_bitstrings(&exec, spec, cfg.shots, seed)?
        }
        None => {
            let state = run_circuit(&circuit.gates, theta, circuit.n)?;
            sample_bitstrings(&state, cfg.shots, seed)
        }
    };
    Ok(samples
        .into_iter()
        .map(|b| {
            let e = table[b.index() as usize];
            (b, e)
        })
        .collect())
}

/// Sampled CVaR energy `C(theta)` of a circuit against a diagonal QUBO
/// Hamiltonian: run, sample `shots` bitstrings (one noise trajectory per
/// shot when noise is on), evaluate `E_k = Q(b_k)`, and average the
/// lowest `ceil(fraction * shots)`.
pub fn cvar_energy(
    circuit: &AssembledCircuit,
    theta: &[f64],
    qubo: &QuboProblem,
    cfg: &CvarConfig,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<f64> {
    let table = energy_table(qubo, circuit.n)?;
    let energies: Vec<f64> = sampled_energies(circuit, theta, &table, cfg, noise, seed)?
        .into_iter()
        .map(|(_, e)| e)
        .collect();
    cvar_from_energies(&energies, cfg.cvar_fraction)
}

/// Exact energy expectation from the amplitudes.
pub fn exact_expected_energy(
    circuit: &AssembledCircuit,
    theta: &[f64],
    qubo: &QuboProblem,
) -> Result<f64> {
    let table = energy_table(qubo, circuit.n)?;
    let state = run_circuit(&circuit.gates, theta, circuit.n)?;
    Ok(state
        .probabilities()
        .iter()
        .zip(&table)
        .map(|(p, e)| p * e)
        .sum())
}

/// Exact CVaR of the full outcome distribution (the infinite-shot limit):
/// the mean of the lowest `fraction` probability mass, with the boundary
/// state counted fractionally.
pub fn exact_cvar_energy(
    circuit: &AssembledCircuit,
    theta: &[f64],
    qubo: &QuboProblem,
    fraction: f64,
) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "cvar_fraction {fraction} outside (0, 1]"
        )));
    }
    let table = energy_table(qubo, circuit.n)?;
    let state = run_circuit(&circuit.gates, theta, circuit.n)?;
    let mut pairs: Vec<(f64, f64)> = table
        .iter()
        .zip(state.probabilities())
        .map(|(&e, p)| (e, p))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut remaining = fraction;
    let mut acc = 0.0;
    for (e, p) in pairs {
        let take = p.min(remaining);
        acc += take * e;
        remaining -= take;
        if remaining <= 1e-15 {
            break;
        }
    }
    Ok(acc / fraction)
}

fn evaluate(
    circuit: &AssembledCircuit,
    theta: &[f64],
    qubo: &QuboProblem,
    mode: &EvalMode,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<f64> {
    match mode {
        EvalMode::Sampled(cfg) => cvar_energy(circuit, theta, qubo, cfg, noise, seed),
        EvalMode::Exact { cvar_fraction } => {
            if noise.is_some() {
                return Err(Error::InvalidConfig(
                    "exact evaluation does not support noise".into(),
                ));
            }
            exact_cvar_energy(circuit, theta, qubo, *cvar_fraction)
        }
    }
}

/// Squared distance to the target energy.
pub fn local_loss(c: f64, e_target: f64) -> f64 {
    (c - e_target) * (c - e_target)
}

/// Parameter-shift gradient of the local loss for one circuit.
///
/// Per active slot `j`, `dC/dtheta_j = (C(+pi/2) - C(-pi/2)) / 2` under
/// the `exp(-i angle P / 2)` rotation convention; the loss chain rule
/// multiplies by `2 (C - target)`. The base and both shifted evaluations
/// reuse the same seed (common random numbers), which keeps sampled
/// gradients close to their exact values. Returns the base energy and a
/// gradient the length of `theta`; slots the circuit never reads stay 0.
pub fn parameter_shift_gradient(
    circuit: &AssembledCircuit,
    theta: &[f64],
    qubo: &QuboProblem,
    mode: &EvalMode,
    noise: Option<&NoiseSpec>,
    seed: u64,
    e_target: f64,
) -> Result<(f64, Vec<f64>)> {
    let base = evaluate(circuit, theta, qubo, mode, noise, seed)?;
    let chain = 2.0 * (base - e_target);
    let mut grad = vec![0.0; theta.len()];
    let mut shifted = theta.to_vec();
    for slot in circuit.active_slots() {
        let original = shifted[slot];
        shifted[slot] = original + FRAC_PI_2;
        let plus = evaluate(circuit, &shifted, qubo, mode, noise, seed)?;
        shifted[slot] = original - FRAC_PI_2;
        let minus = evaluate(circuit, &shifted, qubo, mode, noise, seed)?;
        shifted[slot] = original;
        grad[slot] = chain * 0.5 * (plus - minus);
    }
    Ok((base, grad))
}

/// Score-function gradient of the batch-summed loss with respect to the
/// logits: for each sample and row, `adv * (onehot(choice) - softmax)`.
///
/// With `baseline` on, each sample's advantage subtracts the mean loss of
/// the *other* samples (leave-one-out), which reduces variance without
/// biasing the estimator; a lone sample keeps its raw loss.
pub fn grad_alpha(
    batch: &[ArchAssignment],
    losses: &[f64],
    alpha: &[Vec<f64>],
    baseline: bool,
) -> Result<Vec<Vec<f64>>> {
    if batch.len() != losses.len() {
        return Err(Error::ShapeMismatch {
            expected: batch.len(),
            got: losses.len(),
        });
    }
    let probs = arch_probabilities(alpha);
    let mut grad: Vec<Vec<f64>> = alpha.iter().map(|row| vec![0.0; row.len()]).collect();
    let total: f64 = losses.iter().sum();
    let b = batch.len();
    for (arch, &loss) in batch.iter().zip(losses) {
        if arch.0.len() != alpha.len() {
            return Err(Error::ShapeMismatch {
                expected: alpha.len(),
                got: arch.0.len(),
            });
        }
        let advantage = if baseline && b > 1 {
            loss - (total - loss) / (b as f64 - 1.0)
        } else {
            loss
        };
        for (row, &choice) in arch.0.iter().enumerate() {
            for (c, g) in grad[row].iter_mut().enumerate() {
                let indicator = f64::from(u8::from(c == choice));
                *g += advantage * (indicator - probs[row][c]);
            }
        }
    }
    Ok(grad)
}

/// Losses of one sampled batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchResult {
    pub archs: Vec<ArchAssignment>,
    pub local_losses: Vec<f64>,
    /// Sum of the local losses.
    pub global_loss: f64,
}

/// Architecture logits, the shared theta bank, and optimizer state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperCircuitState {
    pub alpha: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub adam_alpha: AdamState,
    pub adam_theta: AdamState,
    pub epoch: usize,
}

/// Per-epoch training log record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub global_loss: f64,
    pub min_local_loss: f64,
    pub row_entropies: Vec<f64>,
}

/// Search hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub epochs: usize,
    pub batch_size: usize,
    pub cvar: CvarConfig,
    pub lr_alpha: f64,
    pub lr_theta: f64,
    /// Leave-one-out baseline subtraction for the alpha gradient.
    pub baseline_subtraction: bool,
    /// Half-width of the uniform theta initialization.
    pub theta_init_spread: f64,
    pub noise: Option<NoiseSpec>,
    pub seed: u64,
}

/// The super-circuit training loop.
pub struct Trainer<'a> {
    pub pc: &'a PlaceholderCircuit,
    pub pool: &'a OperationPool,
    pub qubo: &'a QuboProblem,
    pub bounds: &'a EnergyBounds,
    pub settings: SearchSettings,
}

impl<'a> Trainer<'a> {
    /// Bank window per placeholder slot: room for the largest candidate.
    pub fn bank_width(&self) -> usize {
        3 * self.pc.n
    }

    pub fn init_state(&self) -> SuperCircuitState {
        use rand::Rng;
        let rows = self.pc.slots();
        let alpha = vec![vec![0.0; self.pool.size()]; rows];
        let bank_len = rows * self.bank_width();
        let spread = self.settings.theta_init_spread;
        let mut rng = seeding::stream(self.settings.seed, &[seeding::TAG_THETA_INIT]);
        let theta: Vec<f64> = (0..bank_len)
            .map(|_| rng.gen_range(-spread..=spread))
            .collect();
        SuperCircuitState {
            adam_alpha: AdamState::new(rows * self.pool.size()),
            adam_theta: AdamState::new(bank_len),
            alpha,
            theta,
            epoch: 0,
        }
    }

    fn bind(&self, arch: &ArchAssignment) -> Result<AssembledCircuit> {
        assemble_with_bank(self.pc, self.pool, arch, self.bank_width())
    }

    /// One epoch: sample a batch, accumulate both gradients, update.
    pub fn run_epoch(&self, state: &mut SuperCircuitState) -> Result<(BatchResult, EpochLog)> {
        let epoch = state.epoch;
        let seed = self.settings.seed;
        let mode = EvalMode::Sampled(self.settings.cvar);
        let batch = sample_batch_seeded(
            &state.alpha,
            self.settings.batch_size,
            derive_seed(seed, &[seeding::TAG_BATCH, epoch as u64]),
        );

        // Per-architecture evaluations are independent; collect in batch
        // order so floating-point reduction is deterministic.
        let evals: Result<Vec<(f64, Vec<f64>)>> = batch
            .par_iter()
            .enumerate()
            .map(|(i, arch)| {
                let circuit = self.bind(arch)?;
                let eval_seed =
                    derive_seed(seed, &[seeding::TAG_EVAL, epoch as u64, i as u64]);
                parameter_shift_gradient(
                    &circuit,
                    &state.theta,
                    self.qubo,
                    &mode,
                    self.settings.noise.as_ref(),
                    eval_seed,
                    self.bounds.e_target,
                )
            })
            .collect();
        let evals = evals?;

        let mut theta_grad = vec![0.0; state.theta.len()];
        let mut losses = Vec::with_capacity(evals.len());
        for (c, grad) in &evals {
            losses.push(local_loss(*c, self.bounds.e_target));
            for (acc, g) in theta_grad.iter_mut().zip(grad) {
                *acc += g;
            }
        }
        let alpha_grad = grad_alpha(
            &batch,
            &losses,
            &state.alpha,
            self.settings.baseline_subtraction,
        )?;

        adam_step(
            &mut state.theta,
            &theta_grad,
            &mut state.adam_theta,
            self.settings.lr_theta,
        )?;
        let mut flat_alpha: Vec<f64> = state.alpha.iter().flatten().copied().collect();
        let flat_grad: Vec<f64> = alpha_grad.iter().flatten().copied().collect();
        adam_step(
            &mut flat_alpha,
            &flat_grad,
            &mut state.adam_alpha,
            self.settings.lr_alpha,
        )?;
        let s = self.pool.size();
        for (row, chunk) in state.alpha.iter_mut().zip(flat_alpha.chunks(s)) {
            row.copy_from_slice(chunk);
        }

        state.epoch += 1;
        let global_loss: f64 = losses.iter().sum();
        let min_local_loss = losses.iter().copied().fold(f64::INFINITY, f64::min);
        let row_entropies = arch_probabilities(&state.alpha)
            .iter()
            .map(|row| row_entropy(row))
            .collect();
        Ok((
            BatchResult {
                archs: batch,
                local_losses: losses,
                global_loss,
            },
            EpochLog {
                epoch,
                global_loss,
                min_local_loss,
                row_entropies,
            },
        ))
    }

    /// Run `epochs` epochs, returning the per-epoch logs.
    pub fn run(&self, state: &mut SuperCircuitState, epochs: usize) -> Result<Vec<EpochLog>> {
        let mut logs = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let (_, log) = self.run_epoch(state)?;
            logs.push(log);
        }
        Ok(logs)
    }
}

/// Fine-tuning hyperparameters (theta only, fixed architecture).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineTuneSettings {
    pub epochs: usize,
    pub lr: f64,
    pub cvar: CvarConfig,
    pub noise: Option<NoiseSpec>,
}

/// Outcome of one fine-tuning trial.
#[derive(Debug, Clone, PartialEq)]
pub struct FineTuneResult {
    pub theta: Vec<f64>,
    /// Scaled CVaR energy per epoch, including the pre-update epoch 0;
    /// length `epochs + 1`.
    pub scaled_curve: Vec<f64>,
    /// The trial's reported solution: the lowest-energy bitstring among
    /// the final evaluation's samples (ties break to the lower index).
    pub final_bitstring: Bitstring,
    /// Lowest scaled sampled energy seen across the run.
    pub min_scaled_energy: f64,
}

/// Adam on theta alone against the squared CVaR-to-target loss.
///
/// Evaluation and gradient seeds derive from
/// `(master_seed, trial_tag, epoch)`, so trials are reproducible and
/// independent of scheduling order.
pub fn fine_tune(
    circuit: &AssembledCircuit,
    theta_init: &[f64],
    qubo: &QuboProblem,
    bounds: &EnergyBounds,
    settings: &FineTuneSettings,
    master_seed: u64,
    trial_tag: u64,
) -> Result<FineTuneResult> {
    if theta_init.len() != circuit.param_count {
        return Err(Error::ShapeMismatch {
            expected: circuit.param_count,
            got: theta_init.len(),
        });
    }
    let table = energy_table(qubo, circuit.n)?;
    let mut theta = theta_init.to_vec();
    let mut adam = AdamState::new(theta.len());
    let mut curve = Vec::with_capacity(settings.epochs + 1);
    let mut min_scaled = f64::INFINITY;
    let mut final_bits = Bitstring::zeros(circuit.n);
    let mode = EvalMode::Sampled(settings.cvar);

    for epoch in 0..=settings.epochs {
        let eval_seed = derive_seed(
            master_seed,
            &[seeding::TAG_TRIAL, trial_tag, seeding::TAG_EVAL, epoch as u64],
        );
        let samples = sampled_energies(
            circuit,
            &theta,
            &table,
            &settings.cvar,
            settings.noise.as_ref(),
            eval_seed,
        )?;
        let energies: Vec<f64> = samples.iter().map(|&(_, e)| e).collect();
        let c = cvar_from_energies(&energies, settings.cvar.cvar_fraction)?;
        let scaled = scale_energy(c, bounds)?;
        if !scaled.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "non-finite scaled energy at epoch {epoch}"
            )));
        }
        curve.push(scaled);
        let best = energies.iter().copied().fold(f64::INFINITY, f64::min);
        min_scaled = min_scaled.min(scale_energy(best, bounds)?);

        if epoch == settings.epochs {
            final_bits = samples
                .iter()
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|&(b, _)| b)
                .unwrap_or(final_bits);
            break;
        }

        let shift_seed = derive_seed(
            master_seed,
            &[seeding::TAG_TRIAL, trial_tag, seeding::TAG_SHIFT, epoch as u64],
        );
        let (_, grad) = parameter_shift_gradient(
            circuit,
            &theta,
            qubo,
            &mode,
            settings.noise.as_ref(),
            shift_seed,
            bounds.e_target,
        )?;
        adam_step(&mut theta, &grad, &mut adam, settings.lr)?;
    }

    Ok(FineTuneResult {
        theta,
        scaled_curve: curve,
        final_bitstring: final_bits,
        min_scaled_energy: min_scaled,
    })
}
