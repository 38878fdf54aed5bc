//! Dataset ingestion and preparation.
//!
//! Three on-disk formats are understood:
//!   - embedding-csv: header `label,f0,...,f{d-1}`, one sample per row
//!   - jsonl: one `{"label": "...", "features": [...]}` object per line
//!   - raw-text-csv: `tweet_id,content,sentiment` (tweet_id is dropped)
//!
//! Raw text goes through a hashed bag-of-words featurizer so the pipeline
//! runs without any pretrained embedding model; precomputed embeddings come
//! in through the other two formats.

use ndarray::Array2;
use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::Path;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Raw (text, class-name) pair awaiting featurization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub content: String,
    pub sentiment: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    EmbeddingCsv,
    Jsonl,
    RawTextCsv,
}

impl DataFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "embedding-csv" => Ok(DataFormat::EmbeddingCsv),
            "jsonl" => Ok(DataFormat::Jsonl),
            "raw-text-csv" => Ok(DataFormat::RawTextCsv),
            other => Err(Error::Argument(format!(
                "unknown format {other:?}; expected embedding-csv, jsonl, or raw-text-csv"
            ))),
        }
    }
}

/// Either a ready dataset or raw records that still need featurizing.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedData {
    Dataset(LabeledDataset),
    Records(Vec<RawRecord>),
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<LoadedData> {
    match format {
        DataFormat::EmbeddingCsv => load_embedding_csv(path).map(LoadedData::Dataset),
        DataFormat::Jsonl => load_jsonl(path).map(LoadedData::Dataset),
        DataFormat::RawTextCsv => load_raw_text_csv(path).map(LoadedData::Records),
    }
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        _ => Error::Parse { line, message },
    }
}

fn load_embedding_csv(path: &Path) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.is_empty() || headers.get(0) != Some("label") {
        return Err(parse_err(1, "embedding csv must start with a `label` column"));
    }
    let d = headers.len() - 1;
    if d == 0 {
        return Err(parse_err(1, "embedding csv has no feature columns"));
    }

    let mut names: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != d + 1 {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", d + 1, record.len()),
            ));
        }
        let label = record.get(0).unwrap_or("").trim();
        if label.is_empty() {
            return Err(parse_err(line, "missing label"));
        }
        let mut row = Vec::with_capacity(d);
        for j in 1..=d {
            let field = record.get(j).unwrap_or("");
            let value: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad feature value {field:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(line, format!("non-finite feature value {field:?}")));
            }
            row.push(value);
        }
        names.push(label.to_string());
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("embedding csv holds no samples".into()));
    }
    dataset_from_rows(rows, names, d)
}

#[derive(Deserialize)]
struct JsonlRow {
    label: String,
    features: Vec<f64>,
}

fn load_jsonl(path: &Path) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path)?;
    let mut names: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut d: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonlRow =
            serde_json::from_str(line).map_err(|e| parse_err(line_no, e.to_string()))?;
        if row.label.trim().is_empty() {
            return Err(parse_err(line_no, "missing label"));
        }
        if row.features.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(line_no, "non-finite feature value"));
        }
        match d {
            None => d = Some(row.features.len()),
            Some(expect) if expect != row.features.len() => {
                return Err(parse_err(
                    line_no,
                    format!("expected {} features, found {}", expect, row.features.len()),
                ));
            }
            _ => {}
        }
        names.push(row.label.trim().to_string());
        rows.push(row.features);
    }
    let d = d.unwrap_or(0);
    if rows.is_empty() {
        return Err(Error::InsufficientData("jsonl file holds no samples".into()));
    }
    dataset_from_rows(rows, names, d)
}

fn load_raw_text_csv(path: &Path) -> Result<Vec<RawRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let content_col = col("content")
        .ok_or_else(|| parse_err(1, "raw text csv is missing a `content` column"))?;
    let sentiment_col = col("sentiment")
        .ok_or_else(|| parse_err(1, "raw text csv is missing a `sentiment` column"))?;
    // tweet_id (and anything else) is ignored

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let content = record.get(content_col).unwrap_or("").trim();
        let sentiment = record.get(sentiment_col).unwrap_or("").trim();
        if content.is_empty() {
            return Err(parse_err(line, "empty content"));
        }
        if sentiment.is_empty() {
            return Err(parse_err(line, "empty sentiment"));
        }
        records.push(RawRecord {
            content: content.to_string(),
            sentiment: sentiment.to_string(),
        });
    }
    if records.is_empty() {
        return Err(Error::InsufficientData("raw text csv holds no samples".into()));
    }
    Ok(records)
}

fn dataset_from_rows(rows: Vec<Vec<f64>>, names: Vec<String>, d: usize) -> Result<LabeledDataset> {
    let (labels, class_names) = encode_labels(&names);
    let mut features = Array2::zeros((rows.len(), d));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            features[(i, j)] = *v;
        }
    }
    LabeledDataset::new(features, labels, class_names)
}

// FNV-1a 64-bit, with two fixed offset bases: one hash picks the bucket, the
// other picks the sign. Fixed constants keep vectors identical across
// platforms and runs.
const FNV_PRIME: u64 = 0x100000001b3;
const FNV_OFFSET_BUCKET: u64 = 0xcbf29ce484222325;
const FNV_OFFSET_SIGN: u64 = 0xaf63bd4c8601b7df;

fn fnv1a(token: &str, offset: u64) -> u64 {
    let mut hash = offset;
    for byte in token.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Hashed bag-of-words: lowercase, split on non-alphanumerics, hash each
/// token to a signed bucket, normalize the vector to unit length. Zero
/// vectors (no tokens survive) are left at zero.
pub fn hash_featurize(records: &[RawRecord], dim: usize) -> Result<LabeledDataset> {
    if records.is_empty() {
        return Err(Error::InsufficientData("no records to featurize".into()));
    }
    if dim < 8 {
        return Err(Error::Argument(format!("featurizer dimension must be >= 8, got {dim}")));
    }
    let mut features = Array2::zeros((records.len(), dim));
    for (i, record) in records.iter().enumerate() {
        let lower = record.content.to_lowercase();
        for token in lower.split(|ch: char| !ch.is_alphanumeric()) {
            if token.is_empty() {
                continue;
            }
            let bucket = (fnv1a(token, FNV_OFFSET_BUCKET) % dim as u64) as usize;
            let sign = if fnv1a(token, FNV_OFFSET_SIGN) & 1 == 0 { 1.0 } else { -1.0 };
            features[(i, bucket)] += sign;
        }
        let norm = features.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            features.row_mut(i).mapv_inplace(|v| v / norm);
        }
    }
    let names: Vec<String> = records.iter().map(|r| r.sentiment.clone()).collect();
    let (labels, class_names) = encode_labels(&names);
    LabeledDataset::new(features, labels, class_names)
}

/// Map class-name strings to integer labels. Classes are ordered by
/// lexicographic sort of the distinct names, so the mapping depends only on
/// the set of names, not on row order.
pub fn encode_labels(names: &[String]) -> (Vec<usize>, Vec<String>) {
    let class_names: Vec<String> = names
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let labels = names
        .iter()
        .map(|n| class_names.binary_search(n).expect("name present by construction"))
        .collect();
    (labels, class_names)
}

/// Train/validation split parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

/// Split into train and validation row sets with a seeded shuffle.
///
/// Stratified mode rounds the train share per class, which keeps class
/// proportions within one sample of the requested fraction. A class that
/// ends up absent from either side logs a warning rather than failing.
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "train_fraction must lie strictly between 0 and 1, got {}",
            spec.train_fraction
        )));
    }
    if ds.is_empty() {
        return Err(Error::InsufficientData("cannot split an empty dataset".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_rows: Vec<usize> = Vec::new();
    let mut val_rows: Vec<usize> = Vec::new();

    if spec.stratified {
        for class in 0..ds.n_classes() {
            let mut members: Vec<usize> =
                (0..ds.len()).filter(|&r| ds.labels[r] == class).collect();
            if members.is_empty() {
                continue;
            }
            members.shuffle(&mut rng);
            let n_train = ((members.len() as f64) * spec.train_fraction).round() as usize;
            let n_train = n_train.min(members.len());
            if n_train == 0 || n_train == members.len() {
                log::warn!(
                    "class {} ({}) has {} sample(s); one split side will not see it",
                    class,
                    ds.class_names[class],
                    members.len()
                );
            }
            train_rows.extend(&members[..n_train]);
            val_rows.extend(&members[n_train..]);
        }
    } else {
        let mut rows: Vec<usize> = (0..ds.len()).collect();
        rows.shuffle(&mut rng);
        let n_train = ((ds.len() as f64) * spec.train_fraction).round() as usize;
        let n_train = n_train.clamp(1, ds.len().max(2) - 1).min(ds.len());
        train_rows.extend(&rows[..n_train]);
        val_rows.extend(&rows[n_train..]);
    }

    train_rows.sort_unstable();
    val_rows.sort_unstable();
    if val_rows.is_empty() {
        log::warn!("validation split is empty (dataset of {} rows)", ds.len());
    }
    Ok((ds.select(&train_rows)?, ds.select(&val_rows)?))
}

/// Partition `0..n_rows` into shuffled batches of `batch_size` (last batch
/// may be short).
pub fn make_batches(n_rows: usize, batch_size: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::Argument("batch_size must be at least 1".into()));
    }
    let mut rows: Vec<usize> = (0..n_rows).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.shuffle(&mut rng);
    Ok(rows.chunks(batch_size).map(|c| c.to_vec()).collect())
}

/// Split plus batching in one call.
pub struct SplitBatches {
    pub train: LabeledDataset,
    pub batches: Vec<Vec<usize>>,
    pub validation: LabeledDataset,
}

pub fn split_and_batch(
    ds: &LabeledDataset,
    spec: &SplitSpec,
    batch_size: usize,
    shuffle_seed: u64,
) -> Result<SplitBatches> {
    let (train, validation) = split(ds, spec)?;
    let batches = make_batches(train.len(), batch_size, shuffle_seed)?;
    Ok(SplitBatches { train, batches, validation })
}
