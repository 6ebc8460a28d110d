//! Heart-disease CSV ingestion, 27-wide feature encoding and seeded splits.
//!
//! Feature layout (column index → meaning) is fixed so neuron indices in the
//! input layer stay stable across runs:
//!
//! | columns | fields |
//! |---------|--------|
//! | 0..5    | age, trestbps, chol, thalach, oldpeak (z-scored) |
//! | 5..8    | sex, fbs, exang (0/1) |
//! | 8..12   | cp one-hot (4) |
//! | 12..15  | restecg one-hot (3) |
//! | 15..18  | slope one-hot (3) |
//! | 18..23  | ca one-hot (5) |
//! | 23..27  | thal one-hot (4) |

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const COLUMNS: [&str; 14] = [
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg", "thalach", "exang", "oldpeak",
    "slope", "ca", "thal", "target",
];

pub const FEATURE_WIDTH: usize = 27;

pub const CONTINUOUS: [&str; 5] = ["age", "trestbps", "chol", "thalach", "oldpeak"];

/// (name, number of categories, first feature column)
pub const CATEGORICAL: [(&str, usize, usize); 5] = [
    ("cp", 4, 8),
    ("restecg", 3, 12),
    ("slope", 3, 15),
    ("ca", 5, 18),
    ("thal", 4, 23),
];

/// One parsed row of the heart-disease table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub age: f64,
    pub sex: u8,
    pub cp: u8,
    pub trestbps: f64,
    pub chol: f64,
    pub fbs: u8,
    pub restecg: u8,
    pub thalach: f64,
    pub exang: u8,
    pub oldpeak: f64,
    pub slope: u8,
    pub ca: u8,
    pub thal: u8,
    pub target: u8,
}

impl RawRecord {
    fn continuous(&self) -> [f64; 5] {
        [self.age, self.trestbps, self.chol, self.thalach, self.oldpeak]
    }

    fn categorical(&self) -> [u8; 5] {
        [self.cp, self.restecg, self.slope, self.ca, self.thal]
    }
}

/// Encoded feature matrix (row-major, `FEATURE_WIDTH` columns) with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
    pub feature_names: Vec<String>,
}

impl EncodedDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.features[i * w..(i + 1) * w]
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> EncodedDataset {
        let mut features = Vec::with_capacity(indices.len() * self.width());
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        EncodedDataset {
            features,
            labels,
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Train/validation partition of an encoded dataset.
#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: EncodedDataset,
    pub validation: EncodedDataset,
    pub split_seed: u64,
    pub train_indices: Vec<usize>,
    pub validation_indices: Vec<usize>,
}

/// Column means and population standard deviations of the continuous fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: [f64; 5],
    pub std: [f64; 5],
}

impl Standardizer {
    pub fn fit(records: &[RawRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty("no records to fit standardizer"));
        }
        let n = records.len() as f64;
        let mut mean = [0.0; 5];
        for r in records {
            for (m, v) in mean.iter_mut().zip(r.continuous()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; 5];
        for r in records {
            for ((s, v), m) in var.iter_mut().zip(r.continuous()).zip(mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut std = [0.0; 5];
        for (i, (s, v)) in std.iter_mut().zip(var).enumerate() {
            *s = (v / n).sqrt();
            if *s == 0.0 || !s.is_finite() {
                return Err(Error::ZeroVariance(CONTINUOUS[i]));
            }
        }
        Ok(Standardizer { mean, std })
    }
}

pub fn feature_names() -> Vec<String> {
    let mut names: Vec<String> = CONTINUOUS.iter().map(|s| s.to_string()).collect();
    names.extend(["sex", "fbs", "exang"].iter().map(|s| s.to_string()));
    for (name, count, _) in CATEGORICAL {
        names.extend((0..count).map(|c| format!("{name}_{c}")));
    }
    names
}

fn domain(column: &str) -> Option<u8> {
    match column {
        "sex" | "fbs" | "exang" | "target" => Some(2),
        _ => CATEGORICAL
            .iter()
            .find(|(name, _, _)| *name == column)
            .map(|(_, n, _)| *n as u8),
    }
}

fn continuous_range(column: &str) -> (f64, f64) {
    match column {
        "age" => (1.0, 120.0),
        "trestbps" => (40.0, 300.0),
        "chol" => (50.0, 1000.0),
        "thalach" => (30.0, 300.0),
        "oldpeak" => (-10.0, 10.0),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    }
}

fn parse_field(raw: &str, row: usize, column: &'static str) -> Result<f64> {
    let value: f64 = raw.trim().parse().map_err(|_| Error::Value {
        row,
        column,
        reason: format!("cannot parse `{raw}` as a number"),
    })?;
    if let Some(n) = domain(column) {
        if value.fract() != 0.0 || value < 0.0 || value >= n as f64 {
            return Err(Error::Value {
                row,
                column,
                reason: format!("value {value} outside categories 0..{n}"),
            });
        }
    } else {
        let (lo, hi) = continuous_range(column);
        if !value.is_finite() || value < lo || value > hi {
            return Err(Error::Value {
                row,
                column,
                reason: format!("value {value} outside range [{lo}, {hi}]"),
            });
        }
    }
    Ok(value)
}

/// Read records from a reader producing the 14-column CSV. Rows are numbered
/// from 1 (the first data row) in error messages.
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut position = [usize::MAX; 14];
    for (idx, h) in headers.iter().enumerate() {
        let h = h.trim();
        match COLUMNS.iter().position(|c| *c == h) {
            Some(c) if position[c] == usize::MAX => position[c] = idx,
            Some(_) => return Err(Error::Column(format!("duplicate column `{h}`"))),
            None => return Err(Error::Column(format!("unexpected column `{h}`"))),
        }
    }
    if let Some(c) = position.iter().position(|p| *p == usize::MAX) {
        return Err(Error::Column(format!("missing column `{}`", COLUMNS[c])));
    }

    let mut records = Vec::new();
    for (i, result) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = result?;
        if rec.len() != COLUMNS.len() {
            return Err(Error::Value {
                row,
                column: "*",
                reason: format!("expected 14 fields, found {}", rec.len()),
            });
        }
        let mut v = [0.0; 14];
        for (c, name) in COLUMNS.iter().enumerate() {
            v[c] = parse_field(&rec[position[c]], row, name)?;
        }
        records.push(RawRecord {
            age: v[0],
            sex: v[1] as u8,
            cp: v[2] as u8,
            trestbps: v[3],
            chol: v[4],
            fbs: v[5] as u8,
            restecg: v[6] as u8,
            thalach: v[7],
            exang: v[8] as u8,
            oldpeak: v[9],
            slope: v[10] as u8,
            ca: v[11] as u8,
            thal: v[12] as u8,
            target: v[13] as u8,
        });
    }
    Ok(records)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Vec<RawRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

/// Encode records into the 27-wide layout. With `standardizer = None` the
/// statistics are fitted on `records` themselves.
pub fn encode(records: &[RawRecord], standardizer: Option<&Standardizer>) -> Result<EncodedDataset> {
    if records.is_empty() {
        return Err(Error::Empty("no records to encode"));
    }
    let fitted;
    let st = match standardizer {
        Some(s) => {
            if let Some(i) = s.std.iter().position(|v| *v == 0.0 || !v.is_finite()) {
                return Err(Error::ZeroVariance(CONTINUOUS[i]));
            }
            s
        }
        None => {
            fitted = Standardizer::fit(records)?;
            &fitted
        }
    };

    let mut features = Vec::with_capacity(records.len() * FEATURE_WIDTH);
    let mut labels = Vec::with_capacity(records.len());
    for r in records {
        let mut row = [0.0; FEATURE_WIDTH];
        for (c, v) in r.continuous().into_iter().enumerate() {
            row[c] = (v - st.mean[c]) / st.std[c];
        }
        row[5] = r.sex as f64;
        row[6] = r.fbs as f64;
        row[7] = r.exang as f64;
        for ((_, _, offset), value) in CATEGORICAL.iter().zip(r.categorical()) {
            row[offset + value as usize] = 1.0;
        }
        features.extend_from_slice(&row);
        labels.push(r.target as f64);
    }
    Ok(EncodedDataset {
        features,
        labels,
        feature_names: feature_names(),
    })
}

/// Recover (cp, restecg, slope, ca, thal) from the one-hot blocks of an
/// encoded row. `None` if a block is not a valid one-hot vector.
pub fn decode_categoricals(row: &[f64]) -> Option<[u8; 5]> {
    let mut out = [0u8; 5];
    for (slot, (_, count, offset)) in out.iter_mut().zip(CATEGORICAL) {
        let block = &row[offset..offset + count];
        if block.iter().sum::<f64>() != 1.0 {
            return None;
        }
        *slot = block.iter().position(|v| *v == 1.0)? as u8;
    }
    Some(out)
}

/// Seeded permutation of `0..n`.
pub fn shuffled_indices(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

fn train_count(n: usize, ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Split(format!("ratio {ratio} not in (0, 1)")));
    }
    let n_train = (ratio * n as f64 + 1e-9).floor() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Split(format!(
            "{n} samples at ratio {ratio} leaves an empty side"
        )));
    }
    Ok(n_train)
}

/// Seeded shuffle, then the first `floor(ratio·n)` rows train and the rest validate.
pub fn split(ds: &EncodedDataset, ratio: f64, seed: u64) -> Result<SplitDataset> {
    let n_train = train_count(ds.len(), ratio)?;
    let perm = shuffled_indices(ds.len(), seed);
    let (tr, va) = perm.split_at(n_train);
    Ok(SplitDataset {
        train: ds.select(tr),
        validation: ds.select(va),
        split_seed: seed,
        train_indices: tr.to_vec(),
        validation_indices: va.to_vec(),
    })
}

/// Split raw records with the same permutation as [`split`], fit the
/// standardizer on the training part only, and encode both sides with it.
pub fn prepare(records: &[RawRecord], ratio: f64, seed: u64) -> Result<SplitDataset> {
    let n_train = train_count(records.len(), ratio)?;
    let perm = shuffled_indices(records.len(), seed);
    let (tr, va) = perm.split_at(n_train);
    let train_records: Vec<RawRecord> = tr.iter().map(|&i| records[i]).collect();
    let val_records: Vec<RawRecord> = va.iter().map(|&i| records[i]).collect();
    let st = Standardizer::fit(&train_records)?;
    Ok(SplitDataset {
        train: encode(&train_records, Some(&st))?,
        validation: encode(&val_records, Some(&st))?,
        split_seed: seed,
        train_indices: tr.to_vec(),
        validation_indices: va.to_vec(),
    })
}
