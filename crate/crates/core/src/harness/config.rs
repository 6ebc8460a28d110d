use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::compression::{CompressionSchedule, InitStrategy, Strategy, SynthesisPolicy};
use crate::error::{Error, Result};
use crate::network::{Architecture, TrainConfig};

/// Environment variable holding the sweep worker-pool size.
pub const WORKERS_ENV: &str = "SYNTHPRUNE_WORKERS";

/// Everything needed to run one experiment or a sweep. Loaded from a flat
/// TOML file; every key can be overridden from the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub strategy: Strategy,
    pub sparsity_threshold: f64,
    /// `"0..50"`, `"3"` or `"1,4,9"`.
    pub seeds: String,
    pub layer_widths: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub n_targets: usize,
    pub max_resamples: usize,
    pub init_strategy: InitStrategy,
    pub random_count: usize,
    pub cycle_period: usize,
    pub stop_delay: usize,
    pub dataset: PathBuf,
    pub output_dir: PathBuf,
    pub split_ratio: f64,
    pub split_seed: u64,
    /// Sweep grid.
    pub strategies: Vec<Strategy>,
    pub thresholds: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let policy = SynthesisPolicy::default();
        let train = TrainConfig::default();
        ExperimentConfig {
            strategy: Strategy::StrategicSynthPrune,
            sparsity_threshold: 0.9,
            seeds: "0..50".into(),
            layer_widths: Architecture::default().widths().to_vec(),
            learning_rate: train.learning_rate,
            epochs: train.epochs,
            batch_size: train.batch_size,
            n_targets: policy.n_targets,
            max_resamples: policy.max_resamples,
            init_strategy: policy.init_strategy,
            random_count: policy.random_count,
            cycle_period: 1,
            stop_delay: 0,
            dataset: PathBuf::from("data/heart.csv"),
            output_dir: PathBuf::from("results"),
            split_ratio: 0.8,
            split_seed: 0,
            strategies: Strategy::ALL.to_vec(),
            thresholds: vec![0.80, 0.85, 0.90, 0.95, 0.99],
        }
    }
}

/// Parse `"a..b"` (exclusive), a single integer, or a comma list.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::Config(format!("bad seed list `{spec}`"));
    let spec = spec.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    Ok(seeds)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn seed_list(&self) -> Result<Vec<u64>> {
        parse_seeds(&self.seeds)
    }

    pub fn architecture(&self) -> Result<Architecture> {
        Architecture::new(self.layer_widths.clone())
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            rng_seed: seed,
        }
    }

    pub fn policy(&self) -> SynthesisPolicy {
        SynthesisPolicy {
            n_targets: self.n_targets,
            max_resamples: self.max_resamples,
            init_strategy: self.init_strategy,
            random_count: self.random_count,
        }
    }

    pub fn schedule(&self, strategy: Strategy, threshold: f64) -> CompressionSchedule {
        CompressionSchedule {
            strategy,
            sparsity_threshold: threshold,
            cycle_period: self.cycle_period,
            stop_delay: self.stop_delay,
            total_epochs: self.epochs,
            policy: self.policy(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.architecture()?;
        self.seed_list()?;
        for t in self.thresholds.iter().chain([&self.sparsity_threshold]) {
            self.schedule(self.strategy, *t).validate()?;
        }
        if self.strategies.is_empty() || self.thresholds.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!("split_ratio {} not in (0, 1)", self.split_ratio)));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) || self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("learning_rate, epochs and batch_size must be valid".into()));
        }
        Ok(())
    }
}

/// Worker count from `SYNTHPRUNE_WORKERS`, else the machine's parallelism.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}
