//! Post-hoc structure analysis: mask similarity, redundant connections and
//! DAG pruning.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{forward, Architecture, Connection, ConnectionMask, MaskedNetwork};

pub const SIMILARITY_METRIC: &str = "jaccard";

/// Jaccard index of the enabled-connection sets; 1 when both are empty.
pub fn mask_similarity(a: &ConnectionMask, b: &ConnectionMask) -> Result<f64> {
    if a.architecture() != b.architecture() {
        return Err(Error::Architecture(format!(
            "cannot compare masks of {:?} and {:?}",
            a.architecture().widths(),
            b.architecture().widths()
        )));
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for k in 0..a.architecture().layer_pairs() {
        for (x, y) in a.layer(k).iter().zip(b.layer(k)) {
            inter += (*x && *y) as usize;
            union += (*x || *y) as usize;
        }
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub metric: String,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// CSV with the metric name in the corner cell and run labels along
    /// the first row and column.
    pub fn to_csv(&self) -> String {
        let mut out = self.metric.clone();
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.values) {
            out.push_str(l);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Largest off-diagonal entry.
    pub fn max_off_diagonal(&self) -> Option<f64> {
        let n = self.values.len();
        (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.values[i][j])
            .max_by(f64::total_cmp)
    }
}

pub fn similarity_matrix(masks: &[ConnectionMask], labels: &[String]) -> Result<SimilarityMatrix> {
    if masks.len() < 2 {
        return Err(Error::Empty("similarity matrix needs at least two masks"));
    }
    if labels.len() != masks.len() {
        return Err(Error::Dimension {
            expected: masks.len(),
            actual: labels.len(),
        });
    }
    let n = masks.len();
    let mut values = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = mask_similarity(&masks[i], &masks[j])?;
            values[i][j] = s;
            values[j][i] = s;
        }
    }
    Ok(SimilarityMatrix {
        metric: SIMILARITY_METRIC.to_string(),
        labels: labels.to_vec(),
        values,
    })
}

/// Neurons reachable from the input layer, per layer.
fn forward_reachable(mask: &ConnectionMask, source: impl Fn(usize, usize) -> bool) -> Vec<Vec<bool>> {
    let arch = mask.architecture();
    let widths = arch.widths();
    let mut reach: Vec<Vec<bool>> = widths
        .iter()
        .enumerate()
        .map(|(l, w)| (0..*w).map(|i| source(l, i)).collect())
        .collect();
    for k in 0..arch.layer_pairs() {
        let cols = widths[k + 1];
        let m = mask.layer(k);
        for i in 0..widths[k] {
            if !reach[k][i] {
                continue;
            }
            for j in 0..cols {
                if m[i * cols + j] {
                    reach[k + 1][j] = true;
                }
            }
        }
    }
    reach
}

/// Neurons from which some enabled path leads to the output layer.
fn backward_reachable(mask: &ConnectionMask) -> Vec<Vec<bool>> {
    let arch = mask.architecture();
    let widths = arch.widths();
    let last = widths.len() - 1;
    let mut co: Vec<Vec<bool>> = widths
        .iter()
        .enumerate()
        .map(|(l, w)| vec![l == last; *w])
        .collect();
    for k in (0..arch.layer_pairs()).rev() {
        let cols = widths[k + 1];
        let m = mask.layer(k);
        for i in 0..widths[k] {
            co[k][i] = (0..cols).any(|j| m[i * cols + j] && co[k + 1][j]);
        }
    }
    co
}

fn redundant_with(mask: &ConnectionMask, reach: &[Vec<bool>]) -> Vec<Connection> {
    let co = backward_reachable(mask);
    mask.enabled()
        .filter(|c| !(reach[c.layer][c.origin] && co[c.layer + 1][c.terminus]))
        .collect()
}

/// Enabled connections that lie on no enabled input→output path.
pub fn find_redundant(mask: &ConnectionMask) -> Vec<Connection> {
    let reach = forward_reachable(mask, |l, _| l == 0);
    redundant_with(mask, &reach)
}

/// Disable every redundant connection. One sweep reaches the fixed point:
/// removing an edge off every complete path cannot take another edge off one.
pub fn dag_prune(mask: &ConnectionMask) -> ConnectionMask {
    let mut out = mask.clone();
    for c in find_redundant(mask) {
        out.set(c, false);
    }
    out
}

/// DAG pruning of a trained network.
///
/// A hidden neuron with no path from the inputs still emits the constant
/// `relu(bias + ...)`; when that constant is non-zero its outgoing edges feed
/// the output and are kept. Everything removed contributes exactly zero to
/// the output, so `forward` is unchanged bit for bit (up to the sign of zero).
pub fn dag_prune_network(net: &MaskedNetwork) -> (MaskedNetwork, Vec<Connection>) {
    let arch: &Architecture = net.architecture();
    let mask = net.mask();
    let from_inputs = forward_reachable(mask, |l, _| l == 0);
    // Neurons off every input path compute the same value for any input.
    let probe = forward(net, &vec![0.0; arch.input_width()]).expect("input width matches");
    let live = forward_reachable(mask, |l, i| {
        l == 0 || (!from_inputs[l][i] && probe.activations[l][i] != 0.0)
    });
    let removed = redundant_with(mask, &live);
    let mut pruned = net.clone();
    for c in &removed {
        pruned.disable(*c);
    }
    (pruned, removed)
}

/// Redundant connections as `layer:origin:terminus` lines.
pub fn connections_to_text(conns: &[Connection]) -> String {
    conns.iter().map(|c| format!("{c}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::init_subnetwork_mask;

    fn arch(w: &[usize]) -> Architecture {
        Architecture::new(w.to_vec()).unwrap()
    }

    #[test]
    fn similarity_examples() {
        let a = arch(&[3, 3, 1]);
        let m1 = ConnectionMask::from_enabled(&a, [Connection::new(0, 0, 0), Connection::new(0, 1, 1)]);
        let m2 = ConnectionMask::from_enabled(&a, [Connection::new(0, 0, 0), Connection::new(0, 2, 2)]);
        let m3 = ConnectionMask::from_enabled(&a, [Connection::new(1, 2, 0)]);
        assert_eq!(mask_similarity(&m1, &m1).unwrap(), 1.0);
        assert_eq!(mask_similarity(&m1, &m2).unwrap(), 1.0 / 3.0);
        assert_eq!(mask_similarity(&m1, &m3).unwrap(), 0.0);
        let e = ConnectionMask::empty(&a);
        assert_eq!(mask_similarity(&e, &e).unwrap(), 1.0);
        let other = ConnectionMask::empty(&arch(&[3, 2, 1]));
        assert!(mask_similarity(&m1, &other).is_err());
    }

    #[test]
    fn matrix_of_identical_masks() {
        let a = arch(&[3, 3, 1]);
        let m = init_subnetwork_mask(&a, 1);
        let sm = similarity_matrix(&[m.clone(), m], &["a".into(), "b".into()]).unwrap();
        assert_eq!(sm.values, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(sm.to_csv(), "jaccard,a,b\na,1,1\nb,1,1\n");
        assert!(similarity_matrix(&[ConnectionMask::empty(&a)], &["a".into()]).is_err());
    }

    #[test]
    fn walk_mask_has_no_redundancy() {
        let a = Architecture::default();
        for seed in 0..50 {
            assert!(find_redundant(&init_subnetwork_mask(&a, seed)).is_empty());
        }
    }

    #[test]
    fn isolated_hidden_connection_is_redundant() {
        let a = arch(&[2, 3, 3, 1]);
        let c = Connection::new(1, 1, 2);
        let m = ConnectionMask::from_enabled(&a, [c]);
        assert_eq!(find_redundant(&m), vec![c]);
    }

    #[test]
    fn broken_chain_removed_entirely() {
        let a = arch(&[2, 2, 2, 1]);
        let m = ConnectionMask::from_enabled(&a, [Connection::new(0, 0, 0), Connection::new(2, 1, 0)]);
        let p = dag_prune(&m);
        assert_eq!(p.enabled_count(), 0);
        let clean = init_subnetwork_mask(&a, 3);
        assert_eq!(dag_prune(&clean), clean);
    }

    #[test]
    fn network_prune_keeps_constant_bias_paths() {
        // hidden neuron 1 has no inputs but a positive bias feeding the output
        let a = arch(&[1, 2, 1]);
        let mut net = MaskedNetwork::init_dense(&a, 0);
        net.set_mask(ConnectionMask::from_enabled(
            &a,
            [Connection::new(0, 0, 0), Connection::new(1, 0, 0), Connection::new(1, 1, 0)],
        ))
        .unwrap();
        net.set_bias(0, 1, 0.5);
        let (pruned, removed) = dag_prune_network(&net);
        assert!(removed.is_empty());
        assert_eq!(pruned, net);
        assert_eq!(find_redundant(net.mask()), vec![Connection::new(1, 1, 0)]);
    }
}
