//! Experiment harness behind the `dqas` binary: configuration loading,
//! search/evaluation drivers, and deterministic CSV/JSON/SVG outputs.

pub mod config;
pub mod experiments;
pub mod outputs;

pub use config::{load_problem, ExperimentConfig, Problem};
pub use experiments::{
    evaluate_circuits, noise_study, run_search, sweep_structure, EvalOptions, EvalSeries,
    RankedArch, SearchOutput, SweepAxis, SweepRow, ThetaInit, TopKFile,
};
pub use outputs::{emit_outputs, CurveSeries, SeriesSummary, Summary};
