//! Experiment orchestration: configuration, single runs, sweeps and reports.

pub mod config;
pub mod experiment;
pub mod report;
pub mod sweep;

pub use config::{parse_seeds, worker_count, ExperimentConfig, WORKERS_ENV};
pub use experiment::{initial_state, run_experiment, RunResult, RunSpec, RunSummary};
pub use report::{
    load_results, report, similarity_report, summarize, BoxStats, CellSummary, SweepSummary,
};
pub use sweep::{execute, grid, sweep, sweep_in_memory, SweepOutcome};
