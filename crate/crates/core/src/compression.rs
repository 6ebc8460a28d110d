//! Structural mutation of masked networks.
//!
//! Everything that enables or disables connections lives here: the
//! random-walk sub-network used as the sparse starting point, constant-sparsity
//! magnitude pruning, random synthesis, strategic synthesis (focal junctures
//! plus a Gaussian over terminus index distance), and the per-epoch cycle that
//! orders them.
//!
//! The sparsity threshold `S` is a target: pruning only acts while more than
//! `floor((1 - S) * total)` connections are enabled, synthesis only while
//! fewer are.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Architecture, Connection, ConnectionMask, MaskedNetwork};
use crate::rng::{self, Stream};

/// Training strategy: which start mask is used and which structural
/// operations run each cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Dense,
    PruneOnly,
    SubnetOnly,
    RandomSynth,
    StrategicSynth,
    RandomSynthPrune,
    StrategicSynthPrune,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::Dense,
        Strategy::PruneOnly,
        Strategy::SubnetOnly,
        Strategy::RandomSynth,
        Strategy::StrategicSynth,
        Strategy::RandomSynthPrune,
        Strategy::StrategicSynthPrune,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Dense => "dense",
            Strategy::PruneOnly => "prune_only",
            Strategy::SubnetOnly => "subnet_only",
            Strategy::RandomSynth => "random_synth",
            Strategy::StrategicSynth => "strategic_synth",
            Strategy::RandomSynthPrune => "random_synth_prune",
            Strategy::StrategicSynthPrune => "strategic_synth_prune",
        }
    }

    pub fn prunes(self) -> bool {
        matches!(
            self,
            Strategy::PruneOnly | Strategy::RandomSynthPrune | Strategy::StrategicSynthPrune
        )
    }

    pub fn synthesis(self) -> Option<SynthesisMode> {
        match self {
            Strategy::RandomSynth | Strategy::RandomSynthPrune => Some(SynthesisMode::Random),
            Strategy::StrategicSynth | Strategy::StrategicSynthPrune => Some(SynthesisMode::Strategic),
            _ => None,
        }
    }

    /// Dense and prune-only start fully connected; all others start from the walk mask.
    pub fn starts_sparse(self) -> bool {
        !matches!(self, Strategy::Dense | Strategy::PruneOnly)
    }

    /// The threshold has no effect on these strategies.
    pub fn threshold_independent(self) -> bool {
        matches!(self, Strategy::Dense | Strategy::SubnetOnly)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthesisMode {
    Random,
    Strategic,
}

/// How a synthesized connection's first weight is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitStrategy {
    /// The focal juncture's current weight.
    Copy,
    /// Uniform over the layer pair's dense-init range.
    Uniform,
}

impl FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "copy" => Ok(InitStrategy::Copy),
            "uniform" => Ok(InitStrategy::Uniform),
            other => Err(Error::Config(format!("unknown init_strategy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPolicy {
    /// Number of focal junctures taken per strategic cycle.
    pub n_targets: usize,
    /// Extra terminus draws after a draw lands on an enabled connection.
    pub max_resamples: usize,
    pub init_strategy: InitStrategy,
    /// Connections added per random-synthesis cycle.
    pub random_count: usize,
}

impl Default for SynthesisPolicy {
    fn default() -> Self {
        SynthesisPolicy {
            n_targets: 4,
            max_resamples: 10,
            init_strategy: InitStrategy::Copy,
            random_count: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionSchedule {
    pub strategy: Strategy,
    pub sparsity_threshold: f64,
    pub cycle_period: usize,
    pub stop_delay: usize,
    pub total_epochs: usize,
    pub policy: SynthesisPolicy,
}

impl CompressionSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sparsity_threshold) {
            return Err(Error::Config(format!(
                "sparsity_threshold {} not in [0, 1]",
                self.sparsity_threshold
            )));
        }
        if self.cycle_period == 0 {
            return Err(Error::Config("cycle_period must be at least 1".into()));
        }
        if self.policy.n_targets == 0 || self.policy.max_resamples == 0 {
            return Err(Error::Config("n_targets and max_resamples must be positive".into()));
        }
        Ok(())
    }

    /// Whether structural operations run at the end of `epoch`.
    pub fn is_cycle_epoch(&self, epoch: usize) -> bool {
        epoch.is_multiple_of(self.cycle_period) && epoch + self.stop_delay < self.total_epochs
    }
}

/// An enabled connection selected by weight magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalJuncture {
    pub connection: Connection,
    pub weight: f64,
}

impl FocalJuncture {
    pub fn magnitude(&self) -> f64 {
        self.weight.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Prune,
    Synthesize,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Prune => "prune",
            EventKind::Synthesize => "synthesize",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralEvent {
    pub epoch: usize,
    pub kind: EventKind,
    pub connections: Vec<Connection>,
    pub sparsity_after: f64,
    pub enabled_after: usize,
}

impl StructuralEvent {
    fn new(epoch: usize, kind: EventKind, connections: Vec<Connection>, mask: &ConnectionMask) -> Self {
        StructuralEvent {
            epoch,
            kind,
            connections,
            sparsity_after: sparsity(mask),
            enabled_after: mask.enabled_count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.connections.is_empty()
    }
}

pub const EVENT_LOG_HEADER: &str = "epoch,kind,sparsity_after,enabled_after,connections";

/// One line per event; connections as `layer:origin:terminus` joined by `;`.
pub fn events_to_text(events: &[StructuralEvent]) -> String {
    let mut out = format!("{EVENT_LOG_HEADER}\n");
    for e in events {
        let conns: Vec<String> = e.connections.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.epoch,
            e.kind,
            e.sparsity_after,
            e.enabled_after,
            conns.join(";")
        ));
    }
    out
}

pub fn events_from_text(text: &str) -> Result<Vec<StructuralEvent>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (n == 0 && line == EVENT_LOG_HEADER) {
            continue;
        }
        let bad = |reason: &str| Error::Parse {
            line: n + 1,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = line.splitn(5, ',').collect();
        if f.len() != 5 {
            return Err(bad("expected 5 fields"));
        }
        let kind = match f[1] {
            "prune" => EventKind::Prune,
            "synthesize" => EventKind::Synthesize,
            _ => return Err(bad("unknown event kind")),
        };
        let connections = if f[4].is_empty() {
            Vec::new()
        } else {
            f[4].split(';').map(str::parse).collect::<Result<Vec<Connection>>>()?
        };
        out.push(StructuralEvent {
            epoch: f[0].parse().map_err(|_| bad("bad epoch"))?,
            kind,
            connections,
            sparsity_after: f[2].parse().map_err(|_| bad("bad sparsity"))?,
            enabled_after: f[3].parse().map_err(|_| bad("bad enabled count"))?,
        });
    }
    Ok(out)
}

/// One random input→output walk per input neuron.
///
/// A neuron picks its successor uniformly the first time a walk reaches it;
/// later walks through the same neuron follow that edge, so overlapping paths
/// share a single connection.
pub fn init_subnetwork_mask(arch: &Architecture, seed: u64) -> ConnectionMask {
    let mut rng = rng::stream(seed, Stream::Walk);
    let widths = arch.widths();
    let mut successor: Vec<Vec<Option<usize>>> = widths[..widths.len() - 1]
        .iter()
        .map(|w| vec![None; *w])
        .collect();
    let mut mask = ConnectionMask::empty(arch);
    for input in 0..arch.input_width() {
        let mut current = input;
        for k in 0..arch.layer_pairs() {
            let next = match successor[k][current] {
                Some(n) => n,
                None => {
                    let n = rng.gen_range(0..widths[k + 1]);
                    successor[k][current] = Some(n);
                    n
                }
            };
            mask.set(Connection::new(k, current, next), true);
            current = next;
        }
    }
    mask
}

/// Disabled fraction of all possible connections.
pub fn sparsity(mask: &ConnectionMask) -> f64 {
    mask.disabled_count() as f64 / mask.total() as f64
}

/// `floor((1 - S) * total)`, the most connections allowed at threshold `S`.
pub fn enabled_budget(threshold: f64, total: usize) -> usize {
    let raw = (1.0 - threshold) * total as f64;
    // guard against 0.1 * 10 = 0.9999999999999998
    ((raw + 1e-9).floor() as usize).min(total)
}

/// Descending |w|, ties by (layer, origin, terminus) ascending.
fn by_magnitude_desc(a: &FocalJuncture, b: &FocalJuncture) -> std::cmp::Ordering {
    b.magnitude()
        .total_cmp(&a.magnitude())
        .then(a.connection.cmp(&b.connection))
}

fn ranked(net: &MaskedNetwork) -> Vec<FocalJuncture> {
    let mut all: Vec<FocalJuncture> = net
        .mask()
        .enabled()
        .map(|c| FocalJuncture {
            connection: c,
            weight: net.weight(c),
        })
        .collect();
    all.sort_by(by_magnitude_desc);
    all
}

/// The `min(n, enabled)` enabled connections of largest |weight|, descending.
pub fn rank_focal_junctures(net: &MaskedNetwork, n: usize) -> Result<Vec<FocalJuncture>> {
    if n == 0 {
        return Err(Error::Config("number of focal junctures must be at least 1".into()));
    }
    let mut all = ranked(net);
    if all.is_empty() {
        return Err(Error::Empty("network has no enabled connections"));
    }
    all.truncate(n);
    Ok(all)
}

/// Disable the smallest-magnitude enabled connections until at most
/// `enabled_budget(threshold)` remain. Survivors are exactly the top-budget
/// connections in [`rank_focal_junctures`] order.
pub fn prune_constant(net: &mut MaskedNetwork, threshold: f64, epoch: usize) -> StructuralEvent {
    let budget = enabled_budget(threshold, net.mask().total());
    let mut removed = Vec::new();
    if net.mask().enabled_count() > budget {
        removed = ranked(net)[budget..].iter().map(|j| j.connection).collect();
        removed.sort();
        for c in &removed {
            net.disable(*c);
        }
    }
    StructuralEvent::new(epoch, EventKind::Prune, removed, net.mask())
}

/// Unnormalised standard-normal density of the index distance `x - beta`
/// for every terminus `x` in `0..width`.
pub fn gaussian_terminus_density(beta: usize, width: usize) -> Vec<f64> {
    let norm = 1.0 / (2.0 * PI).sqrt();
    (0..width)
        .map(|x| {
            let d = x as f64 - beta as f64;
            norm * (-d * d / 2.0).exp()
        })
        .collect()
}

/// [`gaussian_terminus_density`] normalised to sum to 1. Computed relative to
/// the nearest index so that origins far outside the layer stay well defined.
pub fn gaussian_terminus_distribution(beta: usize, width: usize) -> Vec<f64> {
    if width == 0 {
        return Vec::new();
    }
    let nearest = beta.min(width - 1) as f64;
    let d0 = nearest - beta as f64;
    let shifted: Vec<f64> = (0..width)
        .map(|x| {
            let d = x as f64 - beta as f64;
            (-(d * d - d0 * d0) / 2.0).exp()
        })
        .collect();
    let total: f64 = shifted.iter().sum();
    shifted.into_iter().map(|v| v / total).collect()
}

/// Draw an index from a discrete distribution by inverse CDF.
pub fn sample_index<R: Rng + ?Sized>(probabilities: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    probabilities.len() - 1
}

fn uniform_weight<R: Rng + ?Sized>(arch: &Architecture, layer: usize, rng: &mut R) -> f64 {
    let bound = arch.init_bound(layer);
    rng.gen_range(-bound..=bound)
}

/// Grow from the top-N focal junctures: each juncture's origin neuron gets at
/// most one new connection into the next layer, with the terminus drawn from
/// a Gaussian centred on the origin's index.
pub fn synthesize_strategic<R: Rng + ?Sized>(
    net: &mut MaskedNetwork,
    policy: &SynthesisPolicy,
    threshold: f64,
    epoch: usize,
    rng: &mut R,
) -> StructuralEvent {
    let budget = enabled_budget(threshold, net.mask().total());
    let mut added = Vec::new();
    if net.mask().enabled_count() < budget {
        let junctures = rank_focal_junctures(net, policy.n_targets.max(1)).unwrap_or_default();
        for j in junctures {
            if net.mask().enabled_count() >= budget {
                break;
            }
            let Connection { layer, origin, .. } = j.connection;
            let width = net.architecture().widths()[layer + 1];
            let dist = gaussian_terminus_distribution(origin, width);
            for _ in 0..=policy.max_resamples {
                let c = Connection::new(layer, origin, sample_index(&dist, rng));
                if !net.mask().get(c) {
                    let w = match policy.init_strategy {
                        InitStrategy::Copy => j.weight,
                        InitStrategy::Uniform => uniform_weight(net.architecture(), layer, rng),
                    };
                    net.enable(c, w);
                    added.push(c);
                    break;
                }
            }
        }
    }
    StructuralEvent::new(epoch, EventKind::Synthesize, added, net.mask())
}

/// Enable up to `count` uniformly chosen disabled connections, within budget.
/// New weights are uniform over the layer pair's dense-init range.
pub fn synthesize_random<R: Rng + ?Sized>(
    net: &mut MaskedNetwork,
    count: usize,
    threshold: f64,
    epoch: usize,
    rng: &mut R,
) -> StructuralEvent {
    let budget = enabled_budget(threshold, net.mask().total());
    let headroom = budget.saturating_sub(net.mask().enabled_count());
    let candidates: Vec<Connection> = net.mask().disabled().collect();
    let take = count.min(headroom).min(candidates.len());
    let chosen: Vec<Connection> = candidates.choose_multiple(rng, take).copied().collect();
    for c in &chosen {
        let w = uniform_weight(net.architecture(), c.layer, rng);
        net.enable(*c, w);
    }
    StructuralEvent::new(epoch, EventKind::Synthesize, chosen, net.mask())
}

/// Run one structural cycle: prune first, then synthesize, as the strategy
/// dictates. Returns the events produced (possibly empty ones); nothing
/// happens outside cycle epochs.
pub fn apply_cycle<R: Rng + ?Sized>(
    net: &mut MaskedNetwork,
    schedule: &CompressionSchedule,
    epoch: usize,
    rng: &mut R,
) -> Vec<StructuralEvent> {
    let mut events = Vec::new();
    if !schedule.is_cycle_epoch(epoch) {
        return events;
    }
    let s = schedule.sparsity_threshold;
    if schedule.strategy.prunes() {
        events.push(prune_constant(net, s, epoch));
    }
    match schedule.strategy.synthesis() {
        Some(SynthesisMode::Random) => {
            events.push(synthesize_random(net, schedule.policy.random_count, s, epoch, rng))
        }
        Some(SynthesisMode::Strategic) => {
            events.push(synthesize_strategic(net, &schedule.policy, s, epoch, rng))
        }
        None => {}
    }
    events
}
