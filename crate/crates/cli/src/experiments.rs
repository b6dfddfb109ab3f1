//! Search, evaluation, noise, and structure-sweep drivers.

use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use dqas_core::ansatz::{
    arch_from_specs, arch_to_specs, assemble_circuit, bank_to_contiguous, baseline_circuit,
    gate_count, make_pool, ArchAssignment, AssembledCircuit, CandidateSpec, PlaceholderCircuit,
    PoolName,
};
use dqas_core::dqas::{
    fine_tune, top_k, Checkpoint, CvarConfig, EpochLog, FineTuneResult, FineTuneSettings,
    SearchSettings, SuperCircuitState, Trainer,
};
use dqas_core::seeding;
use dqas_core::sim::{NoiseKind, NoisePlacement, NoiseSpec};

use crate::config::{ExperimentConfig, Problem};

/// One architecture out of the top-k extraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankedArch {
    pub rank: usize,
    pub probability: f64,
    pub gate_count: usize,
    pub placeholders: Vec<CandidateSpec>,
    /// The architecture's slice of the trained theta bank, for
    /// warm-started evaluation.
    pub theta: Vec<f64>,
}

/// Serialized `top_k.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopKFile {
    pub pool: PoolName,
    pub qubits: usize,
    pub placeholders: usize,
    pub blocks: usize,
    pub seed: u64,
    pub ranked: Vec<RankedArch>,
}

impl TopKFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Rebuild the assembled circuit for one ranked entry.
    pub fn circuit(&self, rank: usize) -> Result<AssembledCircuit> {
        let entry = self
            .ranked
            .iter()
            .find(|r| r.rank == rank)
            .with_context(|| format!("no rank {rank} in top-k file"))?;
        let pool = make_pool(self.pool, self.qubits)?;
        let pc = PlaceholderCircuit::standard(self.qubits, self.placeholders, self.blocks)?;
        let arch = arch_from_specs(&pool, &entry.placeholders)?;
        Ok(assemble_circuit(&pc, &pool, &arch)?)
    }

    /// Trained theta of one ranked entry.
    pub fn theta(&self, rank: usize) -> Result<&[f64]> {
        let entry = self
            .ranked
            .iter()
            .find(|r| r.rank == rank)
            .with_context(|| format!("no rank {rank} in top-k file"))?;
        Ok(&entry.theta)
    }
}

/// Initial circuit weights for one evaluated series, always shared across
/// the trials of that series (only sampling seeds vary per trial).
#[derive(Debug, Clone)]
pub enum ThetaInit {
    /// Prefix of the experiment's cold random stream.
    Cold,
    /// A fixed vector, typically the trained theta the search produced.
    Warm(Vec<f64>),
}

pub struct SearchOutput {
    pub ranked: Vec<RankedArch>,
    pub archs: Vec<ArchAssignment>,
    pub logs: Vec<EpochLog>,
    pub state: SuperCircuitState,
    pub top_k_file: TopKFile,
    /// Seed of the accepted attempt (differs from the config seed when
    /// the search retrained).
    pub attempt_seed: u64,
    pub restarts_used: usize,
}

/// Tag for deriving retrain seeds.
const TAG_RESTART: u64 = 0x5245_5354;

fn search_attempt(
    cfg: &ExperimentConfig,
    problem: &Problem,
    attempt_seed: u64,
) -> Result<SearchOutput> {
    let n = problem.qubo.num_vars();
    let pool = make_pool(cfg.pool, n)?;
    let pc = PlaceholderCircuit::standard(n, cfg.placeholders, cfg.blocks)?;
    let trainer = Trainer {
        pc: &pc,
        pool: &pool,
        qubo: &problem.qubo,
        bounds: &problem.bounds,
        settings: SearchSettings {
            epochs: cfg.search_epochs,
            batch_size: cfg.batch_size,
            cvar: CvarConfig::new(
                cfg.shots,
                cfg.search_cvar_fraction.unwrap_or(cfg.cvar_fraction),
            )?,
            lr_alpha: cfg.lr_alpha,
            lr_theta: cfg.lr_theta,
            baseline_subtraction: cfg.baseline_subtraction,
            theta_init_spread: cfg.theta_init_spread,
            noise: cfg.noise,
            seed: attempt_seed,
        },
    };
    let mut state = trainer.init_state();
    let logs = trainer.run(&mut state, cfg.search_epochs)?;

    let top = top_k(&state.alpha, cfg.top_k);
    let mut ranked = Vec::with_capacity(top.len());
    let mut archs = Vec::with_capacity(top.len());
    let bank_width = 3 * pc.n;
    for (i, (arch, probability)) in top.into_iter().enumerate() {
        let circuit = assemble_circuit(&pc, &pool, &arch)?;
        let theta = bank_to_contiguous(&pc, &pool, &arch, &state.theta, bank_width)?;
        ranked.push(RankedArch {
            rank: i + 1,
            probability,
            gate_count: gate_count(&circuit.gates),
            placeholders: arch_to_specs(&pool, &arch),
            theta,
        });
        archs.push(arch);
    }
    let top_k_file = TopKFile {
        pool: cfg.pool,
        qubits: n,
        placeholders: cfg.placeholders,
        blocks: cfg.blocks,
        seed: attempt_seed,
        ranked: ranked.clone(),
    };
    Ok(SearchOutput {
        ranked,
        archs,
        logs,
        state,
        top_k_file,
        attempt_seed,
        restarts_used: 0,
    })
}

/// Exact scaled CVaR energy of the rank-1 architecture at its trained
/// weights; the retrain criterion.
fn rank1_quality(cfg: &ExperimentConfig, problem: &Problem, output: &SearchOutput) -> Result<f64> {
    let circuit = output.top_k_file.circuit(1)?;
    let theta = output.top_k_file.theta(1)?;
    let c = dqas_core::dqas::exact_cvar_energy(&circuit, theta, &problem.qubo, cfg.cvar_fraction)?;
    Ok(dqas_core::jssp::scale_energy(c, &problem.bounds)?)
}

/// Super-circuit training on the configured pool and template, then exact
/// top-k extraction from the final architecture distribution.
///
/// A search whose best architecture performs badly at its trained weights
/// is rerun with a derived seed (up to `max_restarts` extra attempts);
/// the best attempt wins. Fully deterministic given the config.
pub fn run_search(cfg: &ExperimentConfig, problem: &Problem) -> Result<SearchOutput> {
    let mut best: Option<(f64, SearchOutput)> = None;
    for attempt in 0..=cfg.max_restarts {
        let attempt_seed = if attempt == 0 {
            cfg.seed
        } else {
            seeding::derive_seed(cfg.seed, &[TAG_RESTART, attempt as u64])
        };
        let mut output = search_attempt(cfg, problem, attempt_seed)?;
        output.restarts_used = attempt;
        let quality = rank1_quality(cfg, problem, &output)?;
        let accept = quality <= cfg.asp_tolerance;
        if best.as_ref().is_none_or(|(q, _)| quality < *q) {
            best = Some((quality, output));
        }
        if accept {
            break;
        }
    }
    Ok(best.expect("at least one attempt").1)
}

/// Write the per-epoch training log CSV.
pub fn write_training_log(path: &Path, logs: &[EpochLog]) -> Result<()> {
    let rows = logs.first().map_or(0, |l| l.row_entropies.len());
    let mut out = Vec::new();
    write!(out, "epoch,global_loss,min_local_loss")?;
    for r in 0..rows {
        write!(out, ",entropy_{r}")?;
    }
    writeln!(out)?;
    for log in logs {
        write!(out, "{},{},{}", log.epoch, log.global_loss, log.min_local_loss)?;
        for e in &log.row_entropies {
            write!(out, ",{e}")?;
        }
        writeln!(out)?;
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Persist everything `search` produces into `out_dir`.
pub fn persist_search(out_dir: &Path, cfg: &ExperimentConfig, output: &SearchOutput) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    write_training_log(&out_dir.join("training_log.csv"), &output.logs)?;
    output.top_k_file.save(&out_dir.join("top_k.json"))?;
    Checkpoint::from_state(&output.state, cfg.seed).save(&out_dir.join("checkpoint.json"))?;
    Ok(())
}

/// Evaluation options shared by every circuit in one comparison.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub trials: usize,
    pub epochs: usize,
    pub noise: Option<NoiseSpec>,
}

/// Aggregated fine-tuning statistics for one circuit.
#[derive(Debug, Clone)]
pub struct EvalSeries {
    pub name: String,
    pub gate_count: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// First epoch whose trial-mean scaled energy is within tolerance.
    pub asp: Option<usize>,
    pub final_mean: f64,
    pub final_std: f64,
    /// Lowest scaled sampled energy over all trials and epochs.
    pub min_scaled_energy: f64,
    /// Most common final solution across trials (each trial reports its
    /// lowest-energy final sample).
    pub final_bitstring: String,
    pub trials: usize,
}

/// First epoch at which the mean curve reaches the tolerance.
pub fn asp_of_curve(mean: &[f64], tolerance: f64) -> Option<usize> {
    mean.iter().position(|&e| e <= tolerance)
}

/// Fine-tune every circuit over the same trial plan and aggregate curves.
///
/// Fairness guard: every series runs identical per-trial sampling seeds,
/// shot budgets, learning rates, and epoch counts; cold starts share one
/// master theta-0 stream (each circuit takes the prefix its parameter
/// count needs). Trials run in parallel; per-trial seeds derive from the
/// master seed and the trial index alone, so results do not depend on
/// thread count.
pub fn evaluate_circuits(
    cfg: &ExperimentConfig,
    problem: &Problem,
    circuits: &[(String, AssembledCircuit, ThetaInit)],
    opts: &EvalOptions,
) -> Result<Vec<EvalSeries>> {
    anyhow::ensure!(!circuits.is_empty(), "nothing to evaluate");
    anyhow::ensure!(opts.trials >= 1, "trials must be at least 1");

    let max_params = circuits
        .iter()
        .map(|(_, c, _)| c.param_count)
        .max()
        .unwrap_or(0);
    let mut theta_stream = seeding::stream(cfg.seed, &[seeding::TAG_EVAL, seeding::TAG_THETA_INIT]);
    let spread = cfg.theta_init_spread;
    let theta_master: Vec<f64> = (0..max_params)
        .map(|_| theta_stream.gen_range(-spread..=spread))
        .collect();

    let settings_for = |noise: Option<NoiseSpec>| -> Result<FineTuneSettings> {
        Ok(FineTuneSettings {
            epochs: opts.epochs,
            lr: cfg.lr_finetune,
            cvar: CvarConfig::new(cfg.shots, cfg.cvar_fraction)?,
            noise,
        })
    };

    let mut series = Vec::with_capacity(circuits.len());
    for (name, circuit, init) in circuits {
        let theta0: Vec<f64> = match init {
            ThetaInit::Cold => theta_master[..circuit.param_count].to_vec(),
            ThetaInit::Warm(theta) => {
                anyhow::ensure!(
                    theta.len() == circuit.param_count,
                    "warm start for `{name}` has {} parameters, circuit needs {}",
                    theta.len(),
                    circuit.param_count
                );
                theta.clone()
            }
        };
        let theta0 = theta0.as_slice();
        let settings = settings_for(opts.noise)?;
        let results: dqas_core::Result<Vec<FineTuneResult>> = (0..opts.trials)
            .into_par_iter()
            .map(|trial| {
                fine_tune(
                    circuit,
                    theta0,
                    &problem.qubo,
                    &problem.bounds,
                    &settings,
                    cfg.seed,
                    trial as u64,
                )
            })
            .collect();
        let results = results?;

        let epochs = opts.epochs + 1;
        let mut mean = vec![0.0; epochs];
        let mut std = vec![0.0; epochs];
        for r in &results {
            assert_eq!(r.scaled_curve.len(), epochs, "curve length drifted");
            for (m, &e) in mean.iter_mut().zip(&r.scaled_curve) {
                *m += e;
            }
        }
        for m in &mut mean {
            *m /= opts.trials as f64;
        }
        for r in &results {
            for (s, (&e, &m)) in std.iter_mut().zip(r.scaled_curve.iter().zip(&mean)) {
                *s += (e - m) * (e - m);
            }
        }
        for s in &mut std {
            *s = (*s / opts.trials as f64).sqrt();
        }
        let min_scaled_energy = results
            .iter()
            .map(|r| r.min_scaled_energy)
            .fold(f64::INFINITY, f64::min);
        let mut final_counts = std::collections::BTreeMap::new();
        for r in &results {
            *final_counts.entry(r.final_bitstring).or_insert(0usize) += 1;
        }
        let final_bitstring = final_counts
            .into_iter()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(bits, _)| bits.to_string())
            .unwrap_or_default();

        series.push(EvalSeries {
            name: name.clone(),
            gate_count: gate_count(&circuit.gates),
            asp: asp_of_curve(&mean, cfg.asp_tolerance),
            final_mean: *mean.last().expect("non-empty curve"),
            final_std: *std.last().expect("non-empty curve"),
            mean,
            std,
            min_scaled_energy,
            final_bitstring,
            trials: opts.trials,
        });
    }

    // The comparison is only meaningful if every series ran the same plan.
    for s in &series {
        assert_eq!(s.trials, opts.trials);
        assert_eq!(s.mean.len(), opts.epochs + 1);
    }
    Ok(series)
}

/// The three canonical noise kinds at probability 0.2 on both ends.
pub fn canonical_noise_kinds() -> Vec<NoiseSpec> {
    [
        NoiseKind::BitFlip,
        NoiseKind::PhaseFlip,
        NoiseKind::Depolarizing,
    ]
    .into_iter()
    .map(|kind| NoiseSpec::new(kind, 0.2, NoisePlacement::Both).expect("valid spec"))
    .collect()
}

/// Evaluate the circuits under each noise model.
pub fn noise_study(
    cfg: &ExperimentConfig,
    problem: &Problem,
    circuits: &[(String, AssembledCircuit, ThetaInit)],
    specs: &[NoiseSpec],
    trials: usize,
) -> Result<Vec<(NoiseSpec, Vec<EvalSeries>)>> {
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let opts = EvalOptions {
            trials,
            epochs: cfg.eval_epochs,
            noise: Some(*spec),
        };
        let series = evaluate_circuits(cfg, problem, circuits, &opts)?;
        out.push((*spec, series));
    }
    Ok(out)
}

/// Which structural knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Placeholders,
    Blocks,
}

impl SweepAxis {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "placeholders" => Ok(SweepAxis::Placeholders),
            "blocks" => Ok(SweepAxis::Blocks),
            other => anyhow::bail!("unknown sweep axis `{other}` (placeholders|blocks)"),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Placeholders => "placeholders",
            SweepAxis::Blocks => "blocks",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub label: String,
    /// None for the baseline reference row.
    pub axis_value: Option<usize>,
    pub gate_count: usize,
    pub asp: Option<usize>,
    pub final_mean: f64,
}

/// For each axis value: search, take the rank-1 architecture, evaluate it,
/// and record gate count and ASP; the baseline reference row comes last.
pub fn sweep_structure(
    cfg: &ExperimentConfig,
    problem: &Problem,
    axis: SweepAxis,
    values: &[usize],
) -> Result<Vec<SweepRow>> {
    anyhow::ensure!(!values.is_empty(), "sweep needs at least one value");
    let mut rows = Vec::new();
    for &value in values {
        anyhow::ensure!(value >= 1, "axis values must be at least 1");
        let mut sub = cfg.clone();
        match axis {
            SweepAxis::Placeholders => sub.placeholders = value,
            SweepAxis::Blocks => sub.blocks = value,
        }
        let search = run_search(&sub, problem)?;
        let circuit = search.top_k_file.circuit(1)?;
        let theta = search.top_k_file.theta(1)?.to_vec();
        let opts = EvalOptions {
            trials: sub.trials,
            epochs: sub.eval_epochs,
            noise: None,
        };
        let init = if sub.warm_start {
            ThetaInit::Warm(theta)
        } else {
            ThetaInit::Cold
        };
        let series = evaluate_circuits(
            &sub,
            problem,
            &[(format!("{}_{value}", axis.name()), circuit, init)],
            &opts,
        )?;
        let s = &series[0];
        rows.push(SweepRow {
            label: s.name.clone(),
            axis_value: Some(value),
            gate_count: s.gate_count,
            asp: s.asp,
            final_mean: s.final_mean,
        });
    }

    let baseline = baseline_circuit(problem.qubo.num_vars());
    let opts = EvalOptions {
        trials: cfg.trials,
        epochs: cfg.eval_epochs,
        noise: None,
    };
    let series = evaluate_circuits(
        cfg,
        problem,
        &[("baseline".to_string(), baseline, ThetaInit::Cold)],
        &opts,
    )?;
    let s = &series[0];
    rows.push(SweepRow {
        label: "baseline".to_string(),
        axis_value: None,
        gate_count: s.gate_count,
        asp: s.asp,
        final_mean: s.final_mean,
    });
    Ok(rows)
}

/// Write the sweep table CSV.
pub fn write_sweep_csv(path: &Path, axis: SweepAxis, rows: &[SweepRow]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "label,{},gate_count,asp,final_mean_e", axis.name())?;
    for row in rows {
        let axis_text = row
            .axis_value
            .map_or(String::new(), |v| v.to_string());
        writeln!(
            out,
            "{},{},{},{},{}",
            row.label,
            axis_text,
            row.gate_count,
            row.asp.map_or(String::new(), |a| a.to_string()),
            row.final_mean
        )?;
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
