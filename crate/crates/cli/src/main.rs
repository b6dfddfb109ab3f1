//! `dqas` — search, evaluate, and study quantum circuit architectures for
//! job-shop scheduling instances.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use dqas_cli::config::{load_problem, ExperimentConfig, Problem};
use dqas_cli::experiments::{
    self, canonical_noise_kinds, evaluate_circuits, noise_study, run_search, sweep_structure,
    EvalOptions, SweepAxis, ThetaInit, TopKFile,
};
use dqas_cli::outputs::{self, emit_outputs, Summary};
use dqas_core::ansatz::{baseline_circuit, render_diagram, AssembledCircuit};
use dqas_core::jssp::{decode_schedule, scale_energy, write_qubo_text};
use dqas_core::sim::{run_circuit, write_amplitudes_csv, NoiseSpec};

#[derive(Parser)]
#[command(
    name = "dqas",
    about = "Differentiable quantum architecture search for job-shop scheduling",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the operation pool (op1|op2).
    #[arg(long)]
    pool: Option<String>,
    /// Override the noise model, as kind:prob:placement.
    #[arg(long)]
    noise: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Super-circuit training; writes training_log.csv, checkpoint.json,
    /// and top_k.json.
    Search {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Fine-tune searched and/or baseline circuits over many trials and
    /// emit convergence curves.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// top_k.json produced by `search`.
        #[arg(long)]
        arch: Option<PathBuf>,
        /// Which ranked architecture to evaluate.
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Also evaluate the manually designed 23-gate baseline.
        #[arg(long)]
        baseline: bool,
        /// Dump the final statevector of the first circuit (trial 0) as
        /// CSV after evaluation.
        #[arg(long)]
        dump_state: Option<PathBuf>,
        /// Skip the SVG plot.
        #[arg(long)]
        no_plot: bool,
    },
    /// Evaluate circuits under bitflip, phaseflip, and depolarizing noise.
    NoiseStudy {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated top_k.json files to include.
        #[arg(long, value_delimiter = ',')]
        archs: Vec<PathBuf>,
        /// Also include the baseline (default true).
        #[arg(long, default_value_t = true)]
        baseline: bool,
    },
    /// Re-run the search across placeholder or block counts and tabulate
    /// gate counts and ASP.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// placeholders | blocks
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<usize>,
    },
    /// Exhaustively enumerate an instance's QUBO: bounds, optimal
    /// bitstring, decoded schedule.
    Oracle {
        /// Experiment config file (for its instance path).
        #[arg(long, conflicts_with = "instance")]
        config: Option<PathBuf>,
        /// Instance file, directly.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Export the compiled QUBO in text form.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn main() {
    if let Err(err) = run() {
        let line = serde_json::json!({ "error": format!("{err:#}") });
        eprintln!("{line}");
        std::process::exit(1);
    }
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(pool) = &common.pool {
        cfg.pool = dqas_core::ansatz::PoolName::parse(pool)?;
    }
    if let Some(noise) = &common.noise {
        cfg.noise = Some(NoiseSpec::parse(noise)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Search { common } => {
            let cfg = load_config(&common)?;
            let problem = load_problem(&cfg.instance)?;
            let output = run_search(&cfg, &problem)?;
            experiments::persist_search(&common.out, &cfg, &output)?;
            println!(
                "search finished: {} epochs, {} ranked architectures -> {}",
                cfg.search_epochs,
                output.ranked.len(),
                common.out.display()
            );
            for arch in &output.ranked {
                println!(
                    "  rank {}: p = {:.4}, {} gates",
                    arch.rank, arch.probability, arch.gate_count
                );
            }
            if let Some(best) = output.top_k_file.ranked.first() {
                let circuit = output.top_k_file.circuit(best.rank)?;
                println!("{}", render_diagram(&circuit));
            }
            Ok(())
        }
        Command::Evaluate {
            common,
            arch,
            rank,
            baseline,
            dump_state,
            no_plot,
        } => {
            let cfg = load_config(&common)?;
            let problem = load_problem(&cfg.instance)?;
            let mut circuits: Vec<(String, AssembledCircuit, ThetaInit)> = Vec::new();
            if let Some(path) = &arch {
                let file = TopKFile::load(path)?;
                let circuit = file.circuit(rank)?;
                let init = if cfg.warm_start {
                    ThetaInit::Warm(file.theta(rank)?.to_vec())
                } else {
                    ThetaInit::Cold
                };
                circuits.push((format!("{}_rank{rank}", file.pool.name()), circuit, init));
            }
            if baseline || cfg.baseline || arch.is_none() {
                circuits.push((
                    "baseline".to_string(),
                    baseline_circuit(problem.qubo.num_vars()),
                    ThetaInit::Cold,
                ));
            }
            let opts = EvalOptions {
                trials: cfg.trials,
                epochs: cfg.eval_epochs,
                noise: cfg.noise,
            };
            let series = evaluate_circuits(&cfg, &problem, &circuits, &opts)?;
            let summary = Summary::from_series(&series, cfg.asp_tolerance, cfg.seed);
            let files = emit_outputs(
                &common.out,
                &outputs::curves_from_series(&series),
                &summary,
                !no_plot,
            )?;
            for s in &series {
                println!(
                    "{}: {} gates, asp = {}, final e = {:.5} +- {:.5}",
                    s.name,
                    s.gate_count,
                    s.asp.map_or("none".into(), |a| a.to_string()),
                    s.final_mean,
                    s.final_std
                );
            }
            for f in &files {
                println!("wrote {}", f.display());
            }
            if let Some(path) = dump_state {
                dump_final_state(&cfg, &problem, &circuits[0].1, &circuits[0].2, &path)?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::NoiseStudy {
            common,
            archs,
            baseline,
        } => {
            let cfg = load_config(&common)?;
            let problem = load_problem(&cfg.instance)?;
            let mut circuits: Vec<(String, AssembledCircuit, ThetaInit)> = Vec::new();
            for path in &archs {
                let file = TopKFile::load(path)?;
                let init = if cfg.warm_start {
                    ThetaInit::Warm(file.theta(1)?.to_vec())
                } else {
                    ThetaInit::Cold
                };
                circuits.push((format!("{}_rank1", file.pool.name()), file.circuit(1)?, init));
            }
            if baseline {
                circuits.push((
                    "baseline".to_string(),
                    baseline_circuit(problem.qubo.num_vars()),
                    ThetaInit::Cold,
                ));
            }
            anyhow::ensure!(!circuits.is_empty(), "no circuits to study");
            let specs = match cfg.noise {
                Some(spec) => vec![spec],
                None => canonical_noise_kinds(),
            };
            let reports = noise_study(&cfg, &problem, &circuits, &specs, cfg.trials)?;
            let mut aggregate = std::collections::BTreeMap::new();
            for (spec, series) in &reports {
                let kind_dir = common.out.join(spec.kind.name());
                let summary = Summary::from_series(series, cfg.asp_tolerance, cfg.seed);
                emit_outputs(
                    &kind_dir,
                    &outputs::curves_from_series(series),
                    &summary,
                    true,
                )?;
                aggregate.insert(spec.kind.name().to_string(), summary);
                println!("noise {} (p = {}):", spec.kind.name(), spec.probability);
                for s in series {
                    println!(
                        "  {}: final e = {:.5} +- {:.5}, min found = {:.5}",
                        s.name, s.final_mean, s.final_std, s.min_scaled_energy
                    );
                }
            }
            let path = common.out.join("noise_summary.json");
            let mut text = serde_json::to_string_pretty(&aggregate)?;
            text.push('\n');
            std::fs::write(&path, text)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Sweep {
            common,
            axis,
            values,
        } => {
            let cfg = load_config(&common)?;
            let problem = load_problem(&cfg.instance)?;
            let axis = SweepAxis::parse(&axis)?;
            let rows = sweep_structure(&cfg, &problem, axis, &values)?;
            std::fs::create_dir_all(&common.out)?;
            let path = common.out.join("sweep.csv");
            experiments::write_sweep_csv(&path, axis, &rows)?;
            println!("{:<18} {:>6} {:>10} {:>6} {:>12}", "label", axis.name(), "gates", "asp", "final_e");
            for row in &rows {
                println!(
                    "{:<18} {:>6} {:>10} {:>6} {:>12.5}",
                    row.label,
                    row.axis_value.map_or(String::new(), |v| v.to_string()),
                    row.gate_count,
                    row.asp.map_or("none".into(), |a| a.to_string()),
                    row.final_mean
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Oracle {
            config,
            instance,
            export,
        } => {
            let instance_path = match (config, instance) {
                (Some(cfg_path), None) => ExperimentConfig::load(&cfg_path)?.instance,
                (None, Some(path)) => path,
                _ => anyhow::bail!("oracle needs exactly one of --config or --instance"),
            };
            let problem = load_problem(&instance_path)?;
            let schedule =
                decode_schedule(&problem.instance, &problem.qubo, &problem.bounds.argmin)?;
            println!("variables: {}", problem.qubo.num_vars());
            println!("e_min: {}", problem.bounds.e_min);
            println!("e_max: {}", problem.bounds.e_max);
            println!("e_target: {}", problem.bounds.e_target);
            println!("argmin: {}", problem.bounds.argmin);
            println!("feasible: {}", schedule.flags.all());
            println!("schedule:\n{schedule}");
            if let Some(path) = export {
                std::fs::write(&path, write_qubo_text(&problem.qubo))
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

/// Re-run the circuit at its trial-0 fine-tuned parameters (noiselessly)
/// and dump the amplitudes.
fn dump_final_state(
    cfg: &ExperimentConfig,
    problem: &Problem,
    circuit: &AssembledCircuit,
    init: &ThetaInit,
    path: &std::path::Path,
) -> Result<()> {
    use dqas_core::dqas::{fine_tune, CvarConfig, FineTuneSettings};
    use rand::Rng;

    let theta0: Vec<f64> = match init {
        ThetaInit::Warm(theta) => theta.clone(),
        ThetaInit::Cold => {
            let mut stream = dqas_core::seeding::stream(
                cfg.seed,
                &[dqas_core::seeding::TAG_EVAL, dqas_core::seeding::TAG_THETA_INIT],
            );
            (0..circuit.param_count)
                .map(|_| stream.gen_range(-cfg.theta_init_spread..=cfg.theta_init_spread))
                .collect()
        }
    };
    let settings = FineTuneSettings {
        epochs: cfg.eval_epochs,
        lr: cfg.lr_finetune,
        cvar: CvarConfig::new(cfg.shots, cfg.cvar_fraction)?,
        noise: cfg.noise,
    };
    let result = fine_tune(
        circuit,
        &theta0,
        &problem.qubo,
        &problem.bounds,
        &settings,
        cfg.seed,
        0,
    )?;
    let state = run_circuit(&circuit.gates, &result.theta, circuit.n)?;
    let energy = problem.qubo.energy(&result.final_bitstring)?;
    let file = std::fs::File::create(path)?;
    write_amplitudes_csv(&state, std::io::BufWriter::new(file))?;
    println!(
        "trial 0 final bitstring {} at scaled energy {:.5}",
        result.final_bitstring,
        scale_energy(energy, &problem.bounds)?
    );
    Ok(())
}
