//! Aggregation of run results into summary tables, box-plot data and the
//! similarity matrix of representative runs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::experiment::RunResult;
use crate::analysis::{similarity_matrix, SimilarityMatrix};
use crate::compression::{EventKind, Strategy};
use crate::error::{Error, Result};

/// Quartiles by the exclusive-median method: the median is left out of both
/// halves when the sample count is odd.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Most extreme values within 1.5·IQR of the box.
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = median_sorted(&v);
        let (q1, q3) = if n == 1 {
            (v[0], v[0])
        } else {
            (median_sorted(&v[..n / 2]), median_sorted(&v[n.div_ceil(2)..]))
        };
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
        Some(BoxStats {
            min: v[0],
            q1,
            median,
            q3,
            max: v[n - 1],
            mean: mean(values),
            whisker_low: inside.first().copied().unwrap_or(v[0]),
            whisker_high: inside.last().copied().unwrap_or(v[n - 1]),
            outliers: v.iter().copied().filter(|x| *x < lo || *x > hi).collect(),
        })
    }
}

/// Aggregates for one (strategy, threshold) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub strategy: Strategy,
    pub threshold: Option<f64>,
    pub runs: usize,
    pub failed: usize,
    pub mean_val_accuracy: f64,
    pub max_val_accuracy: f64,
    pub min_val_accuracy: f64,
    pub mean_val_auc: f64,
    pub max_val_auc: f64,
    pub mean_final_sparsity: f64,
    /// Lowest per-epoch validation accuracy seen in any run of the cell.
    pub min_epoch_accuracy: f64,
    pub accuracy_box: BoxStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub thresholds: Vec<f64>,
    pub cells: Vec<CellSummary>,
}

fn applies(r: &RunResult, strategy: Strategy, threshold: Option<f64>) -> bool {
    r.spec.strategy == strategy
        && (r.spec.sparsity_threshold.is_none() || r.spec.sparsity_threshold == threshold)
}

fn sorted_by_id(results: &[RunResult]) -> Vec<&RunResult> {
    let mut v: Vec<&RunResult> = results.iter().collect();
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

/// Thresholds present in the results, ascending.
pub fn thresholds_of(results: &[RunResult]) -> Vec<f64> {
    let mut t: Vec<f64> = results.iter().filter_map(|r| r.spec.sparsity_threshold).collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Summaries per (strategy, threshold). Threshold-independent strategies
/// are replicated into every threshold column.
pub fn summarize(results: &[RunResult], thresholds: &[f64]) -> SweepSummary {
    let results = sorted_by_id(results);
    let strategies: BTreeSet<Strategy> = results.iter().map(|r| r.spec.strategy).collect();
    let columns: Vec<Option<f64>> = if thresholds.is_empty() {
        vec![None]
    } else {
        thresholds.iter().map(|t| Some(*t)).collect()
    };
    let mut cells = Vec::new();
    for strategy in strategies {
        for &threshold in &columns {
            let cell: Vec<&RunResult> = results
                .iter()
                .copied()
                .filter(|r| applies(r, strategy, threshold))
                .collect();
            let ok: Vec<_> = cell.iter().filter_map(|r| r.summary.map(|s| (r, s))).collect();
            if ok.is_empty() {
                continue;
            }
            let acc: Vec<f64> = ok.iter().map(|(_, s)| s.final_val_accuracy).collect();
            let auc: Vec<f64> = ok.iter().map(|(_, s)| s.final_val_auc).collect();
            let sparsity: Vec<f64> = ok.iter().map(|(_, s)| s.final_sparsity).collect();
            cells.push(CellSummary {
                strategy,
                threshold,
                runs: cell.len(),
                failed: cell.iter().filter(|r| r.error.is_some() || r.summary.is_none()).count(),
                mean_val_accuracy: mean(&acc),
                max_val_accuracy: acc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                min_val_accuracy: acc.iter().copied().fold(f64::INFINITY, f64::min),
                mean_val_auc: mean(&auc),
                max_val_auc: auc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean_final_sparsity: mean(&sparsity),
                min_epoch_accuracy: ok.iter().map(|(_, s)| s.min_val_accuracy).fold(f64::INFINITY, f64::min),
                accuracy_box: BoxStats::from_values(&acc).expect("non-empty"),
            });
        }
    }
    SweepSummary {
        thresholds: thresholds.to_vec(),
        cells,
    }
}

fn fmt_threshold(t: Option<f64>) -> String {
    t.map_or_else(|| "any".to_string(), |t| t.to_string())
}

impl SweepSummary {
    pub fn cell(&self, strategy: Strategy, threshold: Option<f64>) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.threshold == threshold)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "strategy,threshold,runs,failed,mean_val_accuracy,max_val_accuracy,min_val_accuracy,\
             mean_val_auc,max_val_auc,mean_final_sparsity,min_epoch_accuracy,q1,median,q3\n",
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.strategy,
                fmt_threshold(c.threshold),
                c.runs,
                c.failed,
                c.mean_val_accuracy,
                c.max_val_accuracy,
                c.min_val_accuracy,
                c.mean_val_auc,
                c.max_val_auc,
                c.mean_final_sparsity,
                c.min_epoch_accuracy,
                c.accuracy_box.q1,
                c.accuracy_box.median,
                c.accuracy_box.q3
            );
        }
        out
    }

    /// Means at one threshold: `strategy,runs,mean_val_accuracy,mean_val_auc,mean_final_sparsity`.
    pub fn means_table(&self, threshold: f64) -> String {
        let mut out = String::from("strategy,runs,mean_val_accuracy,mean_val_auc,mean_final_sparsity\n");
        for c in self.cells.iter().filter(|c| c.threshold == Some(threshold)) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.strategy, c.runs, c.mean_val_accuracy, c.mean_val_auc, c.mean_final_sparsity
            );
        }
        out
    }

    /// One row per strategy, one column per threshold.
    pub fn threshold_table(&self, value: impl Fn(&CellSummary) -> f64) -> String {
        let mut out = String::from("strategy");
        for t in &self.thresholds {
            let _ = write!(out, ",{t}");
        }
        out.push('\n');
        let strategies: BTreeSet<Strategy> = self.cells.iter().map(|c| c.strategy).collect();
        for s in strategies {
            out.push_str(s.name());
            for t in &self.thresholds {
                match self.cell(s, Some(*t)) {
                    Some(c) => {
                        let _ = write!(out, ",{}", value(c));
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn boxplot_csv(&self) -> String {
        let mut out = String::from(
            "strategy,threshold,n,min,q1,median,q3,max,mean,whisker_low,whisker_high,outliers\n",
        );
        for c in &self.cells {
            let b = &c.accuracy_box;
            let outliers: Vec<String> = b.outliers.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                c.strategy,
                fmt_threshold(c.threshold),
                c.runs - c.failed,
                b.min,
                b.q1,
                b.median,
                b.q3,
                b.max,
                b.mean,
                b.whisker_low,
                b.whisker_high,
                outliers.join(";")
            );
        }
        out
    }
}

/// Per strategy: lowest final accuracy, mean final accuracy, lowest per-epoch accuracy.
pub fn false_start_table(results: &[RunResult]) -> String {
    let mut out = String::from("strategy,runs,min_final_accuracy,mean_final_accuracy,min_epoch_accuracy\n");
    let strategies: BTreeSet<Strategy> = results.iter().map(|r| r.spec.strategy).collect();
    for s in strategies {
        let sums: Vec<_> = sorted_by_id(results)
            .into_iter()
            .filter(|r| r.spec.strategy == s)
            .filter_map(|r| r.summary)
            .collect();
        if sums.is_empty() {
            continue;
        }
        let finals: Vec<f64> = sums.iter().map(|x| x.final_val_accuracy).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s,
            sums.len(),
            finals.iter().copied().fold(f64::INFINITY, f64::min),
            mean(&finals),
            sums.iter().map(|x| x.min_val_accuracy).fold(f64::INFINITY, f64::min)
        );
    }
    out
}

/// Observations about the highest-threshold column: whether any synthesis
/// could happen, and how synthesis rows compare to the sub-network row.
pub fn structural_notes(results: &[RunResult], summary: &SweepSummary, threshold: f64) -> String {
    let mut out = format!("threshold {threshold}\n");
    let sub = summary.cell(Strategy::SubnetOnly, Some(threshold));
    for s in [Strategy::RandomSynth, Strategy::StrategicSynth] {
        let runs: Vec<&RunResult> = results
            .iter()
            .filter(|r| r.spec.strategy == s && r.spec.sparsity_threshold == Some(threshold))
            .collect();
        let with_synth = runs
            .iter()
            .filter(|r| r.events.iter().any(|e| e.kind == EventKind::Synthesize))
            .count();
        let _ = writeln!(out, "{s}: {with_synth}/{} runs with synthesize events", runs.len());
        if let (Some(c), Some(sub)) = (summary.cell(s, Some(threshold)), sub) {
            let diff = c.mean_val_accuracy - sub.mean_val_accuracy;
            let _ = writeln!(
                out,
                "{s}: mean accuracy {:.4} vs subnet_only {:.4} (difference {:+.4}){}",
                c.mean_val_accuracy,
                sub.mean_val_accuracy,
                diff,
                if diff == 0.0 { ", identical" } else { "" }
            );
            if with_synth == 0 && diff != 0.0 {
                let _ = writeln!(
                    out,
                    "{s}: FLAG differs from subnet_only without any synthesis; check seeds and start masks"
                );
            }
        }
    }
    out
}

/// Every `*.json` run result in `dir/runs` (or `dir` itself), sorted by id.
pub fn load_results(dir: &Path) -> Result<Vec<RunResult>> {
    let runs = dir.join("runs");
    let dir = if runs.is_dir() { runs } else { dir.to_path_buf() };
    let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Report(format!("no run results in {}", dir.display())));
    }
    let mut out = paths.iter().map(|p| RunResult::load(p)).collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

/// Write all report tables to `out_dir`. Nothing is written if any result
/// file is missing or corrupt.
pub fn report(results_dir: &Path, out_dir: &Path, table_threshold: Option<f64>) -> Result<Vec<PathBuf>> {
    let results = load_results(results_dir)?;
    let thresholds = thresholds_of(&results);
    let summary = summarize(&results, &thresholds);
    let table_t = table_threshold.or(thresholds.last().copied());

    let mut files: Vec<(String, String)> = vec![
        ("summary.csv".into(), summary.to_csv()),
        ("max_accuracy.csv".into(), summary.threshold_table(|c| c.max_val_accuracy)),
        ("max_auc.csv".into(), summary.threshold_table(|c| c.max_val_auc)),
        ("false_starts.csv".into(), false_start_table(&results)),
        ("boxplot.csv".into(), summary.boxplot_csv()),
    ];
    if let Some(t) = table_t {
        files.push((format!("means_S{t}.csv"), summary.means_table(t)));
        files.push(("notes.txt".into(), structural_notes(&results, &summary, t)));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for (name, body) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Highest final accuracy per strategy (ties to the smaller id), among runs
/// at `threshold` or threshold-independent ones.
pub fn representatives(results: &[RunResult], threshold: Option<f64>) -> Vec<&RunResult> {
    let mut best: Vec<&RunResult> = Vec::new();
    for s in Strategy::ALL {
        let pick = sorted_by_id(results)
            .into_iter()
            .filter(|r| r.spec.strategy == s && r.summary.is_some())
            .filter(|r| threshold.is_none() || r.spec.sparsity_threshold.is_none() || r.spec.sparsity_threshold == threshold)
            .fold(None::<&RunResult>, |acc, r| match acc {
                Some(a) if a.summary.unwrap().final_val_accuracy >= r.summary.unwrap().final_val_accuracy => Some(a),
                _ => Some(r),
            });
        best.extend(pick);
    }
    best
}

/// Similarity matrix over the final masks of the selected runs (by id), or
/// of the per-strategy representatives when `ids` is empty.
pub fn similarity_report(results: &[RunResult], ids: &[String], threshold: Option<f64>) -> Result<SimilarityMatrix> {
    let chosen: Vec<&RunResult> = if ids.is_empty() {
        representatives(results, threshold)
    } else {
        ids.iter()
            .map(|id| {
                results
                    .iter()
                    .find(|r| &r.id == id)
                    .ok_or_else(|| Error::Report(format!("no run with id `{id}`")))
            })
            .collect::<Result<_>>()?
    };
    let masks = chosen.iter().map(|r| r.final_mask()).collect::<Result<Vec<_>>>()?;
    let labels: Vec<String> = chosen.iter().map(|r| r.id.clone()).collect();
    similarity_matrix(&masks, &labels)
}
