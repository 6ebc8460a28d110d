#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;
use synthprune::network::{Architecture, Connection, ConnectionMask, MaskedNetwork};

pub fn dataset_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/heart.csv")
}

pub fn random_arch<R: Rng>(rng: &mut R, max_width: usize, max_layers: usize) -> Architecture {
    let layers = rng.gen_range(3..=max_layers);
    let mut widths: Vec<usize> = (0..layers).map(|_| rng.gen_range(1..=max_width)).collect();
    *widths.last_mut().unwrap() = 1;
    Architecture::new(widths).unwrap()
}

pub fn random_mask<R: Rng>(rng: &mut R, arch: &Architecture, p_enabled: f64) -> ConnectionMask {
    let all: Vec<Connection> = ConnectionMask::full(arch).connections().collect();
    ConnectionMask::from_enabled(arch, all.into_iter().filter(|_| rng.gen_bool(p_enabled)))
}

/// Random weights in [-1, 1], biases in [-0.5, 0.5].
pub fn random_net<R: Rng>(rng: &mut R, arch: &Architecture, mask: ConnectionMask) -> MaskedNetwork {
    let w = arch.widths();
    let weights = (0..arch.layer_pairs())
        .map(|k| (0..w[k] * w[k + 1]).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    let biases = (0..arch.layer_pairs())
        .map(|k| (0..w[k + 1]).map(|_| rng.gen_range(-0.5..=0.5)).collect())
        .collect();
    MaskedNetwork::from_parts(arch.clone(), weights, biases, mask).unwrap()
}

pub fn random_batch<R: Rng>(rng: &mut R, width: usize, rows: usize) -> Vec<f64> {
    (0..width * rows).map(|_| rng.gen_range(-2.0..=2.0)).collect()
}

/// Plain dense MLP over stored weights (zeros included), ReLU then sigmoid.
pub fn dense_forward(net: &MaskedNetwork, batch: &[f64]) -> Vec<f64> {
    let widths = net.architecture().widths().to_vec();
    let n = batch.len() / widths[0];
    let mut out = Vec::with_capacity(n);
    for s in 0..n {
        let mut a: Vec<f64> = batch[s * widths[0]..(s + 1) * widths[0]].to_vec();
        for k in 0..widths.len() - 1 {
            let w = net.layer_weights(k);
            let b = net.layer_biases(k);
            let mut z = b.to_vec();
            for (i, x) in a.iter().enumerate() {
                for (j, zj) in z.iter_mut().enumerate() {
                    *zj += w[i * widths[k + 1] + j] * x;
                }
            }
            a = if k + 2 == widths.len() {
                z.iter().map(|v| 1.0 / (1.0 + (-v).exp())).collect()
            } else {
                z.iter().map(|v| v.max(0.0)).collect()
            };
        }
        out.extend(a);
    }
    out
}

/// Connections on at least one complete input→output path, by explicit
/// enumeration of every path.
pub fn on_some_path(mask: &ConnectionMask) -> BTreeSet<Connection> {
    fn walk(mask: &ConnectionMask, k: usize, node: usize, path: &mut Vec<Connection>, acc: &mut BTreeSet<Connection>) {
        let widths = mask.architecture().widths();
        if k == widths.len() - 1 {
            acc.extend(path.iter().copied());
            return;
        }
        for j in 0..widths[k + 1] {
            let c = Connection::new(k, node, j);
            if mask.get(c) {
                path.push(c);
                walk(mask, k + 1, j, path, acc);
                path.pop();
            }
        }
    }
    let mut acc = BTreeSet::new();
    for i in 0..mask.architecture().input_width() {
        walk(mask, 0, i, &mut Vec::new(), &mut acc);
    }
    acc
}

pub fn redundant_oracle(mask: &ConnectionMask) -> Vec<Connection> {
    let keep = on_some_path(mask);
    mask.enabled().filter(|c| !keep.contains(c)).collect()
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counting half.
pub fn pairwise_auc(scores: &[f64], labels: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (sp, _) in scores.iter().zip(labels).filter(|(_, y)| **y == 1.0) {
        for (sn, _) in scores.iter().zip(labels).filter(|(_, y)| **y == 0.0) {
            pairs += 1.0;
            if sp > sn {
                num += 1.0;
            } else if sp == sn {
                num += 0.5;
            }
        }
    }
    num / pairs
}

/// Top-`budget` enabled connections by |w| desc, then coordinates asc.
pub fn prune_oracle(net: &MaskedNetwork, budget: usize) -> BTreeSet<Connection> {
    let mut all: Vec<(f64, Connection)> = net.mask().enabled().map(|c| (net.weight(c).abs(), c)).collect();
    all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    all.into_iter().take(budget).map(|(_, c)| c).collect()
}

/// Whether every input reaches the output through enabled connections.
pub fn all_inputs_reach_output(mask: &ConnectionMask) -> bool {
    let widths = mask.architecture().widths();
    (0..widths[0]).all(|i| {
        let mut frontier = vec![i];
        for k in 0..widths.len() - 1 {
            let mut next: Vec<usize> = (0..widths[k + 1])
                .filter(|j| frontier.iter().any(|f| mask.get(Connection::new(k, *f, *j))))
                .collect();
            next.dedup();
            frontier = next;
        }
        !frontier.is_empty()
    })
}

/// Smallest |pre-activation| over all non-input neurons and samples.
pub fn min_abs_preactivation(net: &MaskedNetwork, batch: &[f64]) -> f64 {
    let widths = net.architecture().widths().to_vec();
    let n = batch.len() / widths[0];
    let mut min = f64::INFINITY;
    for s in 0..n {
        let mut a: Vec<f64> = batch[s * widths[0]..(s + 1) * widths[0]].to_vec();
        for k in 0..widths.len() - 1 {
            let w = net.layer_weights(k);
            let mut z = net.layer_biases(k).to_vec();
            for (i, x) in a.iter().enumerate() {
                for (j, zj) in z.iter_mut().enumerate() {
                    *zj += w[i * widths[k + 1] + j] * x;
                }
            }
            min = z.iter().fold(min, |m, v| m.min(v.abs()));
            a = z.iter().map(|v| v.max(0.0)).collect();
        }
    }
    min
}

fn loss_of(net: &MaskedNetwork, batch: &[f64], labels: &[f64]) -> f64 {
    let f = synthprune::network::forward(net, batch).unwrap();
    synthprune::network::loss(f.scores(), labels).unwrap()
}

/// Largest relative error between analytic and central-difference gradients
/// over every enabled weight and every bias. Also checks that disabled
/// weights get exactly zero gradient.
pub fn max_gradient_error(net: &MaskedNetwork, batch: &[f64], labels: &[f64]) -> f64 {
    const H: f64 = 1e-5;
    let g = synthprune::network::backward(net, batch, labels).unwrap();
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-7);
    let mut worst: f64 = 0.0;
    let widths = net.architecture().widths().to_vec();
    for k in 0..widths.len() - 1 {
        for c in ConnectionMask::full(net.architecture()).connections().filter(|c| c.layer == k) {
            let idx = c.origin * widths[k + 1] + c.terminus;
            if !net.mask().get(c) {
                assert_eq!(g.weights[k][idx], 0.0, "disabled {c} has gradient");
                continue;
            }
            let w = net.weight(c);
            let mut p = net.clone();
            p.set_weight(c, w + H);
            let mut m = net.clone();
            m.set_weight(c, w - H);
            let numeric = (loss_of(&p, batch, labels) - loss_of(&m, batch, labels)) / (2.0 * H);
            worst = worst.max(rel(g.weights[k][idx], numeric));
        }
        for j in 0..widths[k + 1] {
            let b = net.layer_biases(k)[j];
            let mut p = net.clone();
            p.set_bias(k, j, b + H);
            let mut m = net.clone();
            m.set_bias(k, j, b - H);
            let numeric = (loss_of(&p, batch, labels) - loss_of(&m, batch, labels)) / (2.0 * H);
            worst = worst.max(rel(g.biases[k][j], numeric));
        }
    }
    worst
}

/// The same weights (zeros in disabled slots) under a fully enabled mask.
pub fn dense_clone(net: &MaskedNetwork) -> MaskedNetwork {
    let arch = net.architecture().clone();
    let pairs = arch.layer_pairs();
    MaskedNetwork::from_parts(
        arch.clone(),
        (0..pairs).map(|k| net.layer_weights(k).to_vec()).collect(),
        (0..pairs).map(|k| net.layer_biases(k).to_vec()).collect(),
        ConnectionMask::full(&arch),
    )
    .unwrap()
}
