use super::MaskedNetwork;
use crate::error::{Error, Result};

const PROB_EPS: f64 = 1e-12;

/// Per-layer activations of a batch. `activations[0]` is the input batch,
/// `activations[l]` the output of layer `l` (ReLU for hidden layers, sigmoid
/// for the last). All row-major, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub activations: Vec<Vec<f64>>,
    pub batch: usize,
}

impl Forward {
    /// Output-layer values; for a single output neuron, one score per sample.
    pub fn scores(&self) -> &[f64] {
        self.activations.last().unwrap()
    }
}

/// Gradients with the same shapes as the network's weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn batch_rows(net: &MaskedNetwork, batch: &[f64]) -> Result<usize> {
    let width = net.arch.input_width();
    if !batch.len().is_multiple_of(width) {
        return Err(Error::Dimension {
            expected: width,
            actual: batch.len(),
        });
    }
    Ok(batch.len() / width)
}

/// Forward pass over a row-major batch.
pub fn forward(net: &MaskedNetwork, batch: &[f64]) -> Result<Forward> {
    let n = batch_rows(net, batch)?;
    let pairs = net.arch.layer_pairs();
    let mut activations = Vec::with_capacity(pairs + 1);
    activations.push(batch.to_vec());
    for k in 0..pairs {
        let (rows, cols) = net.arch.pair_shape(k);
        let w = &net.weights[k];
        let m = net.mask.layer(k);
        let bias = &net.biases[k];
        let prev = &activations[k];
        let mut next = vec![0.0; n * cols];
        for b in 0..n {
            let input = &prev[b * rows..(b + 1) * rows];
            let out = &mut next[b * cols..(b + 1) * cols];
            out.copy_from_slice(bias);
            for (i, &x) in input.iter().enumerate() {
                let wrow = &w[i * cols..(i + 1) * cols];
                let mrow = &m[i * cols..(i + 1) * cols];
                for j in 0..cols {
                    if mrow[j] {
                        out[j] += wrow[j] * x;
                    }
                }
            }
            if k + 1 == pairs {
                out.iter_mut().for_each(|z| *z = sigmoid(*z));
            } else {
                out.iter_mut().for_each(|z| *z = z.max(0.0));
            }
        }
        activations.push(next);
    }
    Ok(Forward {
        activations,
        batch: n,
    })
}

/// Mean binary cross-entropy; scores are clamped away from 0 and 1.
pub fn loss(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::Empty("no scores"));
    }
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / scores.len() as f64)
}

/// Exact gradients of the mean BCE loss. Disabled connections get exactly 0.
pub fn backward(net: &MaskedNetwork, batch: &[f64], labels: &[f64]) -> Result<Gradients> {
    forward_backward(net, batch, labels).map(|(g, _)| g)
}

pub(crate) fn forward_backward(
    net: &MaskedNetwork,
    batch: &[f64],
    labels: &[f64],
) -> Result<(Gradients, Forward)> {
    if net.arch.output_width() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            actual: net.arch.output_width(),
        });
    }
    let fwd = forward(net, batch)?;
    let n = fwd.batch;
    if labels.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: labels.len(),
        });
    }
    let pairs = net.arch.layer_pairs();
    let mut gw: Vec<Vec<f64>> = net.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut gb: Vec<Vec<f64>> = net.biases.iter().map(|b| vec![0.0; b.len()]).collect();

    // dL/dz at the sigmoid output of BCE is (p - y) / n.
    let inv_n = 1.0 / n as f64;
    let mut delta: Vec<f64> = fwd
        .scores()
        .iter()
        .zip(labels)
        .map(|(p, y)| (p - y) * inv_n)
        .collect();

    for k in (0..pairs).rev() {
        let (rows, cols) = net.arch.pair_shape(k);
        let w = &net.weights[k];
        let m = net.mask.layer(k);
        let a = &fwd.activations[k];
        let gwk = &mut gw[k];
        let gbk = &mut gb[k];
        for b in 0..n {
            let d = &delta[b * cols..(b + 1) * cols];
            for (g, dj) in gbk.iter_mut().zip(d) {
                *g += dj;
            }
            let input = &a[b * rows..(b + 1) * rows];
            for (i, &x) in input.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                let grow = &mut gwk[i * cols..(i + 1) * cols];
                let mrow = &m[i * cols..(i + 1) * cols];
                for j in 0..cols {
                    if mrow[j] {
                        grow[j] += x * d[j];
                    }
                }
            }
        }
        if k > 0 {
            let mut prev = vec![0.0; n * rows];
            for b in 0..n {
                let d = &delta[b * cols..(b + 1) * cols];
                let input = &a[b * rows..(b + 1) * rows];
                let out = &mut prev[b * rows..(b + 1) * rows];
                for i in 0..rows {
                    if input[i] <= 0.0 {
                        continue;
                    }
                    let wrow = &w[i * cols..(i + 1) * cols];
                    let mrow = &m[i * cols..(i + 1) * cols];
                    let mut s = 0.0;
                    for j in 0..cols {
                        if mrow[j] {
                            s += wrow[j] * d[j];
                        }
                    }
                    out[i] = s;
                }
            }
            delta = prev;
        }
    }
    Ok((
        Gradients {
            weights: gw,
            biases: gb,
        },
        fwd,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Architecture, Connection, ConnectionMask};

    fn arch(w: &[usize]) -> Architecture {
        Architecture::new(w.to_vec()).unwrap()
    }

    #[test]
    fn all_disabled_scores_half() {
        let a = arch(&[3, 2, 1]);
        let mut net = MaskedNetwork::init_dense(&a, 0);
        net.set_mask(ConnectionMask::empty(&a)).unwrap();
        let f = forward(&net, &[1.0, -2.0, 3.0, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(f.scores(), &[0.5, 0.5]);
    }

    #[test]
    fn single_path_is_sigmoid_of_input() {
        let a = arch(&[2, 2, 1]);
        let mut net = MaskedNetwork::init_dense(&a, 0);
        net.set_mask(ConnectionMask::empty(&a)).unwrap();
        net.enable(Connection::new(0, 1, 0), 1.0);
        net.enable(Connection::new(1, 0, 0), 1.0);
        let x = 0.7;
        let f = forward(&net, &[5.0, x]).unwrap();
        assert_eq!(f.scores()[0], sigmoid(x));
    }

    #[test]
    fn dimension_mismatch() {
        let net = MaskedNetwork::init_dense(&arch(&[3, 2, 1]), 0);
        assert!(matches!(forward(&net, &[1.0, 2.0]), Err(Error::Dimension { .. })));
        assert!(backward(&net, &[1.0, 2.0, 3.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn loss_values() {
        assert!((loss(&[0.5; 4], &[1.0, 0.0, 1.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(loss(&[1.0, 0.0], &[1.0, 0.0]).unwrap() < 1e-11);
        let l = loss(&[0.9, 0.1], &[1.0, 0.0]).unwrap();
        assert!((l - (-(0.9f64).ln())).abs() < 1e-15);
        assert!((l - 0.1054).abs() < 1e-4);
        assert!(loss(&[0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn zero_input_gives_zero_first_layer_gradient() {
        let net = MaskedNetwork::init_dense(&arch(&[3, 4, 1]), 5);
        let g = backward(&net, &[0.0; 6], &[1.0, 0.0]).unwrap();
        assert!(g.weights[0].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn disabled_gradient_is_zero() {
        let a = arch(&[3, 3, 1]);
        let mut net = MaskedNetwork::init_dense(&a, 9);
        net.disable(Connection::new(0, 0, 0));
        net.disable(Connection::new(1, 2, 0));
        let g = backward(&net, &[1.0, 2.0, -1.0, 0.3, -0.2, 0.9], &[1.0, 0.0]).unwrap();
        assert_eq!(g.weights[0][0], 0.0);
        assert_eq!(g.weights[1][2], 0.0);
    }
}
