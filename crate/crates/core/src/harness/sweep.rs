use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::experiment::{run_experiment, RunResult, RunSpec};
use super::report::{summarize, SweepSummary};
use crate::data::SplitDataset;
use crate::error::{Error, Result};
use crate::metrics::MetricTrace;

/// Every run of the grid, sorted by id. Threshold-independent strategies
/// appear once per seed.
pub fn grid(cfg: &ExperimentConfig) -> Result<Vec<RunSpec>> {
    cfg.validate()?;
    let seeds = cfg.seed_list()?;
    let mut specs = Vec::new();
    for &strategy in &cfg.strategies {
        let thresholds: &[f64] = if strategy.threshold_independent() {
            &cfg.thresholds[..1]
        } else {
            &cfg.thresholds
        };
        for &t in thresholds {
            for &seed in &seeds {
                specs.push(RunSpec::new(cfg, strategy, t, seed));
            }
        }
    }
    specs.sort_by_key(|s| s.id());
    specs.dedup_by_key(|s| s.id());
    Ok(specs)
}

/// A run that could not be carried out at all.
pub fn failed_result(spec: &RunSpec, err: &Error) -> RunResult {
    RunResult {
        id: spec.id(),
        spec: spec.clone(),
        initial_weights_sha256: String::new(),
        initial_mask_sha256: String::new(),
        trace: MetricTrace::default(),
        events: Vec::new(),
        summary: None,
        error: Some(err.to_string()),
        final_network: String::new(),
    }
}

/// Run every spec on a pool of `workers` threads. Output order follows
/// `specs`, whatever the schedule.
pub fn execute(specs: &[RunSpec], data: &SplitDataset, workers: usize) -> Result<Vec<RunResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        specs
            .par_iter()
            .map(|spec| run_experiment(spec, data).unwrap_or_else(|e| failed_result(spec, &e)))
            .collect()
    }))
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub results: Vec<RunResult>,
    pub summary: SweepSummary,
}

/// Run the grid and aggregate without touching the filesystem.
pub fn sweep_in_memory(cfg: &ExperimentConfig, data: &SplitDataset, workers: usize) -> Result<SweepOutcome> {
    let specs = grid(cfg)?;
    let results = execute(&specs, data, workers)?;
    let summary = summarize(&results, &cfg.thresholds);
    Ok(SweepOutcome { results, summary })
}

/// Run the grid, writing `<out>/runs/<id>.json` per run and `<out>/summary.csv`.
pub fn sweep(cfg: &ExperimentConfig, data: &SplitDataset, out: &Path, workers: usize) -> Result<SweepOutcome> {
    let outcome = sweep_in_memory(cfg, data, workers)?;
    let runs = out.join("runs");
    for r in &outcome.results {
        r.write(&runs)?;
    }
    write_text(&out.join("summary.csv"), &outcome.summary.to_csv())?;
    Ok(outcome)
}

pub(crate) fn write_text(path: &Path, body: &str) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}
