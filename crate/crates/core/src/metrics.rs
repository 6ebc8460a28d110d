//! Validation accuracy, ROC AUC and the per-epoch metric trace.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CUTOFF: f64 = 0.5;

fn check_lengths(scores: &[f64], labels: &[f64]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::Empty("no scores"));
    }
    Ok(())
}

fn is_positive(label: f64) -> bool {
    label > 0.5
}

/// Fraction of samples whose predicted class (`score >= cutoff` → 1) matches the label.
pub fn accuracy(scores: &[f64], labels: &[f64], cutoff: f64) -> Result<f64> {
    check_lengths(scores, labels)?;
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(s, y)| (**s >= cutoff) == is_positive(**y))
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

/// Area under the ROC curve as the Mann–Whitney concordance probability:
/// over all (positive, negative) pairs, the fraction where the positive
/// scores higher, ties counting one half.
///
/// Computed from tie-averaged ranks in `O(n log n)`. Ranks are tracked in
/// half units so the U statistic is an exact integer.
pub fn roc_auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let n_pos = labels.iter().filter(|y| is_positive(**y)).count() as u64;
    let n_neg = labels.len() as u64 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    // Sum over positives of twice their (1-based, tie-averaged) rank.
    let mut twice_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start+1 ..= end share the average (start + 1 + end) / 2.
        let twice_avg = (start + 1 + end) as u64;
        let pos_in_group = order[start..end]
            .iter()
            .filter(|&&i| is_positive(labels[i]))
            .count() as u64;
        twice_rank_sum += twice_avg * pos_in_group;
        start = end;
    }
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Ok(twice_u as f64 / (2 * n_pos * n_neg) as f64)
}

/// Metrics recorded at the end of one training epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
    pub val_auc: f64,
    pub sparsity: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricTrace {
    pub epochs: Vec<EpochMetrics>,
}

impl MetricTrace {
    pub fn push(&mut self, m: EpochMetrics) {
        self.epochs.push(m);
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn last(&self) -> Option<&EpochMetrics> {
        self.epochs.last()
    }

    /// `epoch,train_loss,val_accuracy,val_auc,sparsity` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_accuracy,val_auc,sparsity\n");
        for m in &self.epochs {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                m.epoch, m.train_loss, m.val_accuracy, m.val_auc, m.sparsity
            );
        }
        out
    }
}
