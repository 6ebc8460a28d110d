use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::compression::{
    apply_cycle, events_to_text, init_subnetwork_mask, CompressionSchedule, StructuralEvent, Strategy,
};
use crate::data::SplitDataset;
use crate::error::{Error, Result};
use crate::metrics::MetricTrace;
use crate::network::{train_into, Architecture, ConnectionMask, MaskedNetwork, TrainConfig};
use crate::rng::{self, Stream};

/// One cell of the experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub strategy: Strategy,
    /// `None` for strategies the threshold does not affect.
    pub sparsity_threshold: Option<f64>,
    pub seed: u64,
    pub layer_widths: Vec<usize>,
    pub train: TrainConfig,
    pub schedule: CompressionSchedule,
    pub split_ratio: f64,
    pub split_seed: u64,
}

impl RunSpec {
    pub fn new(cfg: &ExperimentConfig, strategy: Strategy, threshold: f64, seed: u64) -> Self {
        let sparsity_threshold = (!strategy.threshold_independent()).then_some(threshold);
        RunSpec {
            strategy,
            sparsity_threshold,
            seed,
            layer_widths: cfg.layer_widths.clone(),
            train: cfg.train_config(seed),
            schedule: cfg.schedule(strategy, sparsity_threshold.unwrap_or(0.0)),
            split_ratio: cfg.split_ratio,
            split_seed: cfg.split_seed,
        }
    }

    /// File-name-safe identifier, e.g. `strategic_synth__S0.9__seed007`.
    pub fn id(&self) -> String {
        match self.sparsity_threshold {
            Some(s) => format!("{}__S{}__seed{:03}", self.strategy, s, self.seed),
            None => format!("{}__seed{:03}", self.strategy, self.seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub final_val_accuracy: f64,
    pub final_val_auc: f64,
    pub final_sparsity: f64,
    /// Lowest validation accuracy over all epochs.
    pub min_val_accuracy: f64,
    pub epochs_completed: usize,
}

impl RunSummary {
    pub fn from_trace(trace: &MetricTrace) -> Option<Self> {
        let last = trace.last()?;
        Some(RunSummary {
            final_val_accuracy: last.val_accuracy,
            final_val_auc: last.val_auc,
            final_sparsity: last.sparsity,
            min_val_accuracy: trace
                .epochs
                .iter()
                .map(|m| m.val_accuracy)
                .fold(f64::INFINITY, f64::min),
            epochs_completed: trace.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub id: String,
    pub spec: RunSpec,
    /// SHA-256 of the dense initial network file.
    pub initial_weights_sha256: String,
    /// SHA-256 of the starting mask file.
    pub initial_mask_sha256: String,
    pub trace: MetricTrace,
    /// Non-empty structural events, in order.
    pub events: Vec<StructuralEvent>,
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
    /// Final network in the text network format.
    pub final_network: String,
}

impl RunResult {
    pub fn final_mask(&self) -> Result<ConnectionMask> {
        Ok(MaskedNetwork::from_text(&self.final_network)?.mask().clone())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("run result serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Report(format!("corrupt result file {}: {e}", path.display())))
    }

    /// Write `<dir>/<id>.json`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{}.json", self.id));
        std::fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Write the JSON plus the trace CSV, event log and final network file.
    pub fn write_with_artifacts(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut paths = vec![self.write(dir)?];
        for (suffix, body) in [
            ("trace.csv", self.trace.to_csv()),
            ("events.csv", events_to_text(&self.events)),
            ("network.txt", self.final_network.clone()),
        ] {
            let path = dir.join(format!("{}.{suffix}", self.id));
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The shared starting point for `seed`: dense weights plus the strategy's start mask.
pub fn initial_state(arch: &Architecture, strategy: Strategy, seed: u64) -> (MaskedNetwork, ConnectionMask) {
    let dense = MaskedNetwork::init_dense(arch, seed);
    let mask = if strategy.starts_sparse() {
        init_subnetwork_mask(arch, seed)
    } else {
        ConnectionMask::full(arch)
    };
    (dense, mask)
}

/// Train one network under its strategy. Training failures are recorded in
/// the result rather than returned.
pub fn run_experiment(spec: &RunSpec, data: &SplitDataset) -> Result<RunResult> {
    let arch = Architecture::new(spec.layer_widths.clone())?;
    spec.schedule.validate()?;
    let (mut net, start_mask) = initial_state(&arch, spec.strategy, spec.seed);
    let initial_weights_sha256 = sha256_hex(&net.to_text());
    let initial_mask_sha256 = sha256_hex(&start_mask.to_text());
    net.set_mask(start_mask)?;

    let mut rng = rng::stream(spec.seed, Stream::Compression);
    let mut events = Vec::new();
    let mut trace = MetricTrace::default();
    let schedule = spec.schedule;
    let outcome = train_into(
        &mut net,
        data,
        &spec.train,
        &mut |epoch, net| {
            events.extend(
                apply_cycle(net, &schedule, epoch, &mut rng)
                    .into_iter()
                    .filter(|e| !e.is_empty()),
            );
        },
        &mut trace,
    );
    let error = match outcome {
        Ok(()) => None,
        Err(e @ (Error::NonFiniteLoss { .. } | Error::SingleClass)) => Some(e.to_string()),
        Err(e) => return Err(e),
    };
    Ok(RunResult {
        id: spec.id(),
        spec: spec.clone(),
        initial_weights_sha256,
        initial_mask_sha256,
        summary: RunSummary::from_trace(&trace),
        trace,
        events,
        error,
        final_network: net.to_text(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids() {
        let cfg = ExperimentConfig::default();
        assert_eq!(RunSpec::new(&cfg, Strategy::StrategicSynth, 0.9, 7).id(), "strategic_synth__S0.9__seed007");
        assert_eq!(RunSpec::new(&cfg, Strategy::Dense, 0.9, 12).id(), "dense__seed012");
        assert_eq!(RunSpec::new(&cfg, Strategy::SubnetOnly, 0.9, 1).sparsity_threshold, None);
    }
}
