//! Experiment configuration files and instance loading.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use dqas_core::ansatz::PoolName;
use dqas_core::jssp::{
    brute_force_oracle, build_qubo, presolve, EnergyBounds, JsspInstance, QuboProblem,
};
use dqas_core::sim::NoiseSpec;

fn default_trials() -> usize {
    50
}
fn default_search_epochs() -> usize {
    100
}
fn default_eval_epochs() -> usize {
    30
}
fn default_shots() -> usize {
    1000
}
fn default_batch_size() -> usize {
    8
}
fn default_cvar_fraction() -> f64 {
    0.25
}
fn default_lr_alpha() -> f64 {
    0.3
}
fn default_lr_theta() -> f64 {
    0.2
}
fn default_lr_finetune() -> f64 {
    0.15
}
fn default_top_k() -> usize {
    5
}
fn default_asp_tolerance() -> f64 {
    1e-3
}
fn default_theta_init_spread() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}
fn default_max_restarts() -> usize {
    4
}

/// One experiment: the instance, the search space, and hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Instance file, relative to the config file's directory.
    pub instance: PathBuf,
    pub pool: PoolName,
    pub placeholders: usize,
    #[serde(default = "default_one")]
    pub blocks: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_search_epochs")]
    pub search_epochs: usize,
    #[serde(default = "default_eval_epochs")]
    pub eval_epochs: usize,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_cvar_fraction")]
    pub cvar_fraction: f64,
    /// CVaR fraction for super-circuit training; falls back to
    /// `cvar_fraction`. The search rewards concentrated output
    /// distributions with a wider tail than fine-tuning does.
    #[serde(default)]
    pub search_cvar_fraction: Option<f64>,
    #[serde(default = "default_lr_alpha")]
    pub lr_alpha: f64,
    #[serde(default = "default_lr_theta")]
    pub lr_theta: f64,
    #[serde(default = "default_lr_finetune")]
    pub lr_finetune: f64,
    pub seed: u64,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_asp_tolerance")]
    pub asp_tolerance: f64,
    #[serde(default = "default_theta_init_spread")]
    pub theta_init_spread: f64,
    #[serde(default = "default_true")]
    pub baseline_subtraction: bool,
    /// Retrain budget: a search whose rank-1 architecture misses the
    /// target (exact CVaR above `asp_tolerance` at the trained weights)
    /// reruns with a derived seed, up to this many extra attempts, and
    /// keeps the best attempt.
    #[serde(default = "default_max_restarts")]
    pub max_restarts: usize,
    /// Start searched circuits from their trained search weights instead
    /// of the cold shared theta-0. The baseline always starts cold (it
    /// has no trained weights to carry over).
    #[serde(default = "default_true")]
    pub warm_start: bool,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    /// Include the manually designed comparator in evaluations.
    #[serde(default)]
    pub baseline: bool,
}

fn default_one() -> usize {
    1
}

impl ExperimentConfig {
    /// Load a config file, resolving the instance path against the config
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.instance.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.instance = dir.join(&cfg.instance);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        anyhow::ensure!(self.trials >= 1, "trials must be at least 1");
        anyhow::ensure!(self.placeholders >= 1, "placeholders must be at least 1");
        anyhow::ensure!(self.blocks >= 1, "blocks must be at least 1");
        anyhow::ensure!(
            self.instance.exists(),
            "instance file {} does not exist",
            self.instance.display()
        );
        anyhow::ensure!(self.shots >= 1, "shots must be at least 1");
        anyhow::ensure!(
            self.cvar_fraction > 0.0 && self.cvar_fraction <= 1.0,
            "cvar_fraction must lie in (0, 1]"
        );
        anyhow::ensure!(self.asp_tolerance > 0.0, "asp_tolerance must be positive");
        Ok(())
    }
}

/// A loaded instance with its presolved QUBO and exact energy bounds.
pub struct Problem {
    pub instance: JsspInstance,
    pub qubo: QuboProblem,
    pub bounds: EnergyBounds,
}

/// Build, presolve, and enumerate an instance file. Penalty weights come
/// from the file when present, otherwise from the cost-dominating default;
/// the training target is always the enumerated optimum.
pub fn load_problem(instance_path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(instance_path)
        .with_context(|| format!("reading instance {}", instance_path.display()))?;
    let instance = JsspInstance::from_json(&text)?;
    let weights = JsspInstance::file_weights(&text)?.unwrap_or_else(|| instance.default_weights());
    let full = build_qubo(&instance, &weights)?;
    let qubo = presolve(&instance, &full)?;
    let bounds = brute_force_oracle(&qubo)?;
    Ok(Problem {
        instance,
        qubo,
        bounds,
    })
}
