//! Masked feedforward networks.
//!
//! Layer pair `k` connects layer `k` (origins, rows) to layer `k + 1`
//! (termini, columns). Weight matrices and masks are stored row-major with
//! shape `widths[k] × widths[k + 1]`.

mod pass;
mod text;
mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

pub use pass::{backward, forward, loss, Forward, Gradients};
pub use train::{train, train_into, TrainConfig};

/// Layer widths, input first, output last.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    widths: Vec<usize>,
}

impl Architecture {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 3 {
            return Err(Error::Architecture(format!(
                "need input, at least one hidden and an output layer, got {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(Error::Architecture(format!("zero-width layer in {widths:?}")));
        }
        Ok(Architecture { widths })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn layer_pairs(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn pair_shape(&self, k: usize) -> (usize, usize) {
        (self.widths[k], self.widths[k + 1])
    }

    pub fn total_connections(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// Glorot-uniform half-width for layer pair `k`.
    pub fn init_bound(&self, k: usize) -> f64 {
        let (fan_in, fan_out) = self.pair_shape(k);
        (6.0 / (fan_in + fan_out) as f64).sqrt()
    }
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            widths: vec![27, 16, 8, 1],
        }
    }
}

/// One connection: layer pair, origin neuron, terminus neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Connection {
    pub layer: usize,
    pub origin: usize,
    pub terminus: usize,
}

impl Connection {
    pub fn new(layer: usize, origin: usize, terminus: usize) -> Self {
        Connection {
            layer,
            origin,
            terminus,
        }
    }
}

impl std::fmt::Display for Connection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.layer, self.origin, self.terminus)
    }
}

impl std::str::FromStr for Connection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Parse {
            line: 0,
            reason: format!("bad connection `{s}`"),
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let n = |p: &str| p.parse::<usize>().map_err(|_| bad());
        Ok(Connection::new(n(parts[0])?, n(parts[1])?, n(parts[2])?))
    }
}

/// Enabled/disabled state of every possible connection.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConnectionMask {
    arch: Architecture,
    layers: Vec<Vec<bool>>,
}

impl ConnectionMask {
    fn filled(arch: &Architecture, value: bool) -> Self {
        let layers = (0..arch.layer_pairs())
            .map(|k| {
                let (r, c) = arch.pair_shape(k);
                vec![value; r * c]
            })
            .collect();
        ConnectionMask {
            arch: arch.clone(),
            layers,
        }
    }

    pub fn full(arch: &Architecture) -> Self {
        Self::filled(arch, true)
    }

    pub fn empty(arch: &Architecture) -> Self {
        Self::filled(arch, false)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    fn index(&self, c: Connection) -> usize {
        c.origin * self.arch.widths[c.layer + 1] + c.terminus
    }

    pub fn contains(&self, c: Connection) -> bool {
        c.layer < self.arch.layer_pairs()
            && c.origin < self.arch.widths[c.layer]
            && c.terminus < self.arch.widths[c.layer + 1]
    }

    pub fn get(&self, c: Connection) -> bool {
        self.layers[c.layer][self.index(c)]
    }

    pub fn set(&mut self, c: Connection, enabled: bool) {
        let i = self.index(c);
        self.layers[c.layer][i] = enabled;
    }

    /// Row-major flags of layer pair `k`.
    pub fn layer(&self, k: usize) -> &[bool] {
        &self.layers[k]
    }

    pub fn enabled_count(&self) -> usize {
        self.layers.iter().flatten().filter(|b| **b).count()
    }

    pub fn disabled_count(&self) -> usize {
        self.total() - self.enabled_count()
    }

    pub fn total(&self) -> usize {
        self.arch.total_connections()
    }

    /// Enabled connections in (layer, origin, terminus) order.
    pub fn enabled(&self) -> impl Iterator<Item = Connection> + '_ {
        self.connections().filter(|c| self.get(*c))
    }

    pub fn disabled(&self) -> impl Iterator<Item = Connection> + '_ {
        self.connections().filter(|c| !self.get(*c))
    }

    /// Every possible connection in (layer, origin, terminus) order.
    pub fn connections(&self) -> impl Iterator<Item = Connection> + '_ {
        (0..self.arch.layer_pairs()).flat_map(move |k| {
            let (rows, cols) = self.arch.pair_shape(k);
            (0..rows).flat_map(move |i| (0..cols).map(move |j| Connection::new(k, i, j)))
        })
    }

    pub fn from_enabled(arch: &Architecture, enabled: impl IntoIterator<Item = Connection>) -> Self {
        let mut m = Self::empty(arch);
        for c in enabled {
            m.set(c, true);
        }
        m
    }
}

/// Weights, biases and connection mask of a feedforward network.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedNetwork {
    pub(crate) arch: Architecture,
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) biases: Vec<Vec<f64>>,
    pub(crate) mask: ConnectionMask,
}

impl MaskedNetwork {
    /// Fully connected network with Glorot-uniform weights and zero biases.
    pub fn init_dense(arch: &Architecture, seed: u64) -> Self {
        let mut rng = rng::stream(seed, Stream::Init);
        let weights = (0..arch.layer_pairs())
            .map(|k| {
                let (r, c) = arch.pair_shape(k);
                let bound = arch.init_bound(k);
                (0..r * c).map(|_| rng.gen_range(-bound..=bound)).collect()
            })
            .collect();
        let biases = arch.widths[1..].iter().map(|w| vec![0.0; *w]).collect();
        MaskedNetwork {
            arch: arch.clone(),
            weights,
            biases,
            mask: ConnectionMask::full(arch),
        }
    }

    /// Assemble a network from parts; disabled slots are forced to zero.
    pub fn from_parts(
        arch: Architecture,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        mask: ConnectionMask,
    ) -> Result<Self> {
        if mask.arch != arch {
            return Err(Error::Architecture("mask architecture differs".into()));
        }
        for k in 0..arch.layer_pairs() {
            let (r, c) = arch.pair_shape(k);
            if weights.get(k).map(Vec::len) != Some(r * c) {
                return Err(Error::Dimension {
                    expected: r * c,
                    actual: weights.get(k).map_or(0, Vec::len),
                });
            }
            if biases.get(k).map(Vec::len) != Some(c) {
                return Err(Error::Dimension {
                    expected: c,
                    actual: biases.get(k).map_or(0, Vec::len),
                });
            }
        }
        if weights.len() != arch.layer_pairs() || biases.len() != arch.layer_pairs() {
            return Err(Error::Dimension {
                expected: arch.layer_pairs(),
                actual: weights.len(),
            });
        }
        let mut net = MaskedNetwork {
            arch,
            weights,
            biases,
            mask,
        };
        net.zero_disabled();
        Ok(net)
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn mask(&self) -> &ConnectionMask {
        &self.mask
    }

    /// Row-major weights of layer pair `k`.
    pub fn layer_weights(&self, k: usize) -> &[f64] {
        &self.weights[k]
    }

    /// Biases of layer `k + 1`.
    pub fn layer_biases(&self, k: usize) -> &[f64] {
        &self.biases[k]
    }

    pub fn weight(&self, c: Connection) -> f64 {
        self.weights[c.layer][self.mask.index(c)]
    }

    /// Replace the mask; weights of newly disabled connections become 0.
    /// Newly enabled connections keep whatever is stored (0 unless set).
    pub fn set_mask(&mut self, mask: ConnectionMask) -> Result<()> {
        if mask.arch != self.arch {
            return Err(Error::Architecture("mask architecture differs".into()));
        }
        self.mask = mask;
        self.zero_disabled();
        Ok(())
    }

    pub fn enable(&mut self, c: Connection, weight: f64) {
        let i = self.mask.index(c);
        self.mask.set(c, true);
        self.weights[c.layer][i] = weight;
    }

    pub fn disable(&mut self, c: Connection) {
        let i = self.mask.index(c);
        self.mask.set(c, false);
        self.weights[c.layer][i] = 0.0;
    }

    pub fn set_weight(&mut self, c: Connection, weight: f64) {
        debug_assert!(self.mask.get(c), "writing weight of disabled connection");
        let i = self.mask.index(c);
        self.weights[c.layer][i] = weight;
    }

    pub fn set_bias(&mut self, k: usize, j: usize, value: f64) {
        self.biases[k][j] = value;
    }

    fn zero_disabled(&mut self) {
        for (w, m) in self.weights.iter_mut().zip(&self.mask.layers) {
            for (w, on) in w.iter_mut().zip(m) {
                if !on {
                    *w = 0.0;
                }
            }
        }
    }

    /// Disabled weights are zero and every parameter is finite.
    pub fn check_invariants(&self) -> bool {
        self.weights
            .iter()
            .zip(&self.mask.layers)
            .all(|(w, m)| w.iter().zip(m).all(|(w, on)| w.is_finite() && (*on || *w == 0.0)))
            && self.biases.iter().flatten().all(|b| b.is_finite())
    }
}
