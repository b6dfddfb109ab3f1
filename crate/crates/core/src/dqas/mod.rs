//! Differentiable architecture search over a placeholder circuit.
//!
//! The architecture distribution factorizes per placeholder slot: row `i`
//! of the logit matrix `alpha` is softmaxed into a categorical over pool
//! candidates, and an architecture is one draw per row. Circuit weights
//! live in a shared theta bank with one fixed-width window per slot, so a
//! single bank serves every sampled architecture. Training alternates
//! CVaR energy evaluation, parameter-shift gradients for theta,
//! score-function gradients for alpha, and Adam updates.

mod adam;
mod checkpoint;
mod engine;
mod softmax;
mod topk;

pub use adam::{adam_step, AdamState};
pub use checkpoint::Checkpoint;
pub use engine::{
    cvar_energy, cvar_from_energies, exact_cvar_energy, exact_expected_energy, fine_tune,
    grad_alpha, local_loss, parameter_shift_gradient, BatchResult, CvarConfig, EpochLog,
    EvalMode, FineTuneResult, FineTuneSettings, SearchSettings, SuperCircuitState, Trainer,
};
pub use softmax::{
    arch_probabilities, arch_probability, row_entropy, sample_arch, sample_batch,
    sample_batch_seeded,
};
pub use topk::top_k;
