use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::pass::{forward, forward_backward, loss};
use super::MaskedNetwork;
use crate::data::{EncodedDataset, SplitDataset};
use crate::error::{Error, Result};
use crate::metrics::{self, EpochMetrics, MetricTrace};
use crate::rng::{self, Stream};

/// Plain mini-batch gradient descent settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 200,
            batch_size: 32,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, train_len: usize) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.batch_size == 0 || self.batch_size > train_len {
            return Err(Error::Config(format!(
                "batch_size {} not in 1..={train_len}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// Train loss, validation accuracy/AUC and sparsity of the current network.
pub(crate) fn evaluate(net: &MaskedNetwork, data: &SplitDataset, epoch: usize) -> Result<EpochMetrics> {
    let train_scores = scores(net, &data.train)?;
    let train_loss = loss(&train_scores, &data.train.labels)?;
    if !train_loss.is_finite() {
        return Err(Error::NonFiniteLoss { epoch });
    }
    let val_scores = scores(net, &data.validation)?;
    Ok(EpochMetrics {
        epoch,
        train_loss,
        val_accuracy: metrics::accuracy(&val_scores, &data.validation.labels, metrics::DEFAULT_CUTOFF)?,
        val_auc: metrics::roc_auc(&val_scores, &data.validation.labels)?,
        sparsity: net.mask.disabled_count() as f64 / net.mask.total() as f64,
    })
}

fn scores(net: &MaskedNetwork, ds: &EncodedDataset) -> Result<Vec<f64>> {
    Ok(forward(net, &ds.features)?.activations.pop().unwrap())
}

fn step(net: &mut MaskedNetwork, batch: &[f64], labels: &[f64], lr: f64, epoch: usize) -> Result<()> {
    let (grads, _) = forward_backward(net, batch, labels)?;
    for (w, g) in net.weights.iter_mut().zip(&grads.weights) {
        for (w, g) in w.iter_mut().zip(g) {
            *w -= lr * g;
        }
    }
    for (b, g) in net.biases.iter_mut().zip(&grads.biases) {
        for (b, g) in b.iter_mut().zip(g) {
            *b -= lr * g;
        }
    }
    if net.weights.iter().chain(&net.biases).flatten().any(|w| !w.is_finite()) {
        return Err(Error::NonFiniteLoss { epoch });
    }
    Ok(())
}

/// Train for `cfg.epochs`, calling `hook(epoch, net)` after each epoch's
/// updates and before that epoch's metrics are recorded.
pub fn train(
    net: &mut MaskedNetwork,
    data: &SplitDataset,
    cfg: &TrainConfig,
    hook: &mut dyn FnMut(usize, &mut MaskedNetwork),
) -> Result<MetricTrace> {
    let mut trace = MetricTrace::default();
    train_into(net, data, cfg, hook, &mut trace)?;
    Ok(trace)
}

/// As [`train`], appending to `trace` so completed epochs survive an abort.
pub fn train_into(
    net: &mut MaskedNetwork,
    data: &SplitDataset,
    cfg: &TrainConfig,
    hook: &mut dyn FnMut(usize, &mut MaskedNetwork),
    trace: &mut MetricTrace,
) -> Result<()> {
    let train = &data.train;
    cfg.validate(train.len())?;
    if train.width() != net.arch.input_width() {
        return Err(Error::Dimension {
            expected: net.arch.input_width(),
            actual: train.width(),
        });
    }
    let width = train.width();
    let mut rng = rng::stream(cfg.rng_seed, Stream::Shuffle);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batch = Vec::with_capacity(cfg.batch_size * width);
    let mut labels = Vec::with_capacity(cfg.batch_size);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            batch.clear();
            labels.clear();
            for &i in chunk {
                batch.extend_from_slice(train.row(i));
                labels.push(train.labels[i]);
            }
            step(net, &batch, &labels, cfg.learning_rate, epoch)?;
        }
        hook(epoch, net);
        trace.push(evaluate(net, data, epoch)?);
    }
    Ok(())
}
