//! Resumable search checkpoints.
//!
//! A checkpoint pins everything a resumed run needs to continue exactly
//! where the original left off: the optimizer state and the master seed
//! from which all per-epoch RNG streams are re-derived. Resuming from a
//! checkpoint written after epoch `e` replays the identical epochs
//! `e+1, e+2, ...` an uninterrupted run would have produced.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dqas::engine::SuperCircuitState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub epoch: usize,
    pub alpha: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub adam_alpha: crate::dqas::AdamState,
    pub adam_theta: crate::dqas::AdamState,
    /// Root of every derived RNG stream.
    pub master_seed: u64,
}

impl Checkpoint {
    pub fn from_state(state: &SuperCircuitState, master_seed: u64) -> Self {
        Self {
            epoch: state.epoch,
            alpha: state.alpha.clone(),
            theta: state.theta.clone(),
            adam_alpha: state.adam_alpha.clone(),
            adam_theta: state.adam_theta.clone(),
            master_seed,
        }
    }

    pub fn into_state(self) -> SuperCircuitState {
        SuperCircuitState {
            alpha: self.alpha,
            theta: self.theta,
            adam_alpha: self.adam_alpha,
            adam_theta: self.adam_theta,
            epoch: self.epoch,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable checkpoint")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("bad checkpoint: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::Checkpoint(format!("write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Checkpoint(format!("read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
