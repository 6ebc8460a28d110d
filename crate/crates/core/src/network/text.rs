//! Plain-text network and mask files.
//!
//! ```text
//! synthprune-network 1
//! widths 3 2 1
//! layer 0 3 2
//! weights
//! 0.25 -0.5
//! 0 0.125
//! 1.5 0
//! bias
//! 0 0
//! mask
//! 11
//! 01
//! 10
//! layer 1 2 1
//! ...
//! end
//! ```
//!
//! Weights are row-major (one line per origin neuron) and printed with the
//! shortest representation that parses back to the identical `f64`. A mask
//! file uses the header `synthprune-mask 1` and carries only the `mask`
//! block of each layer.

use std::fmt::Write as _;

use super::{Architecture, ConnectionMask, MaskedNetwork};
use crate::error::{Error, Result};

pub const NETWORK_HEADER: &str = "synthprune-network 1";
pub const MASK_HEADER: &str = "synthprune-mask 1";

fn write_mask_rows(out: &mut String, mask: &ConnectionMask, k: usize) {
    let (rows, cols) = mask.arch.pair_shape(k);
    for i in 0..rows {
        let line: String = mask.layers[k][i * cols..(i + 1) * cols]
            .iter()
            .map(|b| if *b { '1' } else { '0' })
            .collect();
        out.push_str(&line);
        out.push('\n');
    }
}

fn write_widths(out: &mut String, arch: &Architecture) {
    out.push_str("widths");
    for w in arch.widths() {
        let _ = write!(out, " {w}");
    }
    out.push('\n');
}

fn write_floats(out: &mut String, values: &[f64]) {
    let line: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    out.push_str(&line.join(" "));
    out.push('\n');
}

impl ConnectionMask {
    pub fn to_text(&self) -> String {
        let mut out = format!("{MASK_HEADER}\n");
        write_widths(&mut out, &self.arch);
        for k in 0..self.arch.layer_pairs() {
            let (r, c) = self.arch.pair_shape(k);
            let _ = writeln!(out, "layer {k} {r} {c}");
            write_mask_rows(&mut out, self, k);
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut p = Parser::new(text);
        p.expect(MASK_HEADER)?;
        let arch = p.widths()?;
        let mut mask = ConnectionMask::empty(&arch);
        for k in 0..arch.layer_pairs() {
            p.layer_header(&arch, k)?;
            mask.layers[k] = p.mask_rows(arch.pair_shape(k))?;
        }
        p.expect("end")?;
        Ok(mask)
    }
}

impl MaskedNetwork {
    pub fn to_text(&self) -> String {
        let mut out = format!("{NETWORK_HEADER}\n");
        write_widths(&mut out, &self.arch);
        for k in 0..self.arch.layer_pairs() {
            let (r, c) = self.arch.pair_shape(k);
            let _ = writeln!(out, "layer {k} {r} {c}");
            out.push_str("weights\n");
            for i in 0..r {
                write_floats(&mut out, &self.weights[k][i * c..(i + 1) * c]);
            }
            out.push_str("bias\n");
            write_floats(&mut out, &self.biases[k]);
            out.push_str("mask\n");
            write_mask_rows(&mut out, &self.mask, k);
        }
        out.push_str("end\n");
        out
    }

    /// Parse a network file. Weights stored in disabled slots must be zero.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut p = Parser::new(text);
        p.expect(NETWORK_HEADER)?;
        let arch = p.widths()?;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut mask = ConnectionMask::empty(&arch);
        for k in 0..arch.layer_pairs() {
            let (r, c) = arch.pair_shape(k);
            p.layer_header(&arch, k)?;
            p.expect("weights")?;
            let mut w = Vec::with_capacity(r * c);
            for _ in 0..r {
                w.extend(p.floats(c)?);
            }
            p.expect("bias")?;
            biases.push(p.floats(c)?);
            p.expect("mask")?;
            mask.layers[k] = p.mask_rows((r, c))?;
            if let Some(pos) = w.iter().zip(&mask.layers[k]).position(|(w, on)| !on && *w != 0.0) {
                return Err(Error::Parse {
                    line: p.line,
                    reason: format!("layer {k}: non-zero weight in disabled slot {pos}"),
                });
            }
            weights.push(w);
        }
        p.expect("end")?;
        MaskedNetwork::from_parts(arch, weights, biases, mask)
    }
}

struct Parser<'a> {
    lines: std::iter::Peekable<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            lines: text.lines().peekable(),
            line: 0,
        }
    }

    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            reason: reason.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        loop {
            self.line += 1;
            match self.lines.next() {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => return Ok(l.trim()),
                None => return Err(self.err("unexpected end of input")),
            }
        }
    }

    fn expect(&mut self, want: &str) -> Result<()> {
        let got = self.next()?;
        if got != want {
            return Err(self.err(format!("expected `{want}`, found `{got}`")));
        }
        Ok(())
    }

    fn widths(&mut self) -> Result<Architecture> {
        let l = self.next()?;
        let rest = l
            .strip_prefix("widths")
            .ok_or_else(|| self.err("expected `widths`"))?;
        let widths = rest
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| self.err("bad width"))?;
        Architecture::new(widths)
    }

    fn layer_header(&mut self, arch: &Architecture, k: usize) -> Result<()> {
        let (r, c) = arch.pair_shape(k);
        let want = format!("layer {k} {r} {c}");
        let got = self.next()?;
        if got.split_whitespace().collect::<Vec<_>>().join(" ") != want {
            return Err(self.err(format!("expected `{want}`, found `{got}`")));
        }
        Ok(())
    }

    fn floats(&mut self, n: usize) -> Result<Vec<f64>> {
        let l = self.next()?;
        let v = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| self.err("bad number"))?;
        if v.len() != n {
            return Err(self.err(format!("expected {n} values, found {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(self.err("non-finite value"));
        }
        Ok(v)
    }

    fn mask_rows(&mut self, (rows, cols): (usize, usize)) -> Result<Vec<bool>> {
        let mut out = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let l = self.next()?;
            if l.len() != cols {
                return Err(self.err(format!("expected {cols} mask characters, found {}", l.len())));
            }
            for ch in l.chars() {
                out.push(match ch {
                    '1' => true,
                    '0' => false,
                    _ => return Err(self.err(format!("bad mask character `{ch}`"))),
                });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Connection;

    #[test]
    fn network_roundtrip_is_exact() {
        let arch = Architecture::new(vec![4, 3, 2, 1]).unwrap();
        let mut net = MaskedNetwork::init_dense(&arch, 21);
        net.disable(Connection::new(1, 2, 1));
        net.set_bias(0, 1, -1e-17);
        let text = net.to_text();
        let back = MaskedNetwork::from_text(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn mask_roundtrip() {
        let arch = Architecture::new(vec![3, 2, 1]).unwrap();
        let m = ConnectionMask::from_enabled(&arch, [Connection::new(0, 2, 1), Connection::new(1, 1, 0)]);
        let text = m.to_text();
        assert!(text.contains("layer 0 3 2\n00\n00\n01\n"));
        assert_eq!(ConnectionMask::from_text(&text).unwrap(), m);
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(ConnectionMask::from_text("synthprune-mask 1\nwidths 2 1 1\nlayer 0 2 1\n1\n2\n").is_err());
        assert!(MaskedNetwork::from_text("nonsense").is_err());
        let arch = Architecture::new(vec![2, 1, 1]).unwrap();
        let net = MaskedNetwork::init_dense(&arch, 0);
        let truncated: String = net.to_text().lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(MaskedNetwork::from_text(&truncated).is_err());
    }
}
