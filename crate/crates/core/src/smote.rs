//! Synthetic minority oversampling.
//!
//! Each minority class is topped up to the majority count by interpolating
//! between a random class member and one of its k nearest same-class
//! neighbors: x_new = x_i + lambda * (x_nn - x_i), lambda in [0, 1). Draws
//! use one RNG stream per class, so output is a pure function of
//! (dataset, config).

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        // k = 5 is the canonical choice
        SmoteConfig { k_neighbors: 5, seed: 0 }
    }
}

/// Per-class row counts, indexed by class.
pub fn class_counts(ds: &LabeledDataset) -> Vec<usize> {
    let mut counts = vec![0usize; ds.n_classes()];
    for &label in &ds.labels {
        counts[label] += 1;
    }
    counts
}

/// Indices of the k candidates nearest (Euclidean) to `query_row`, ascending
/// by distance, ties broken by ascending row index.
pub fn knn_indices(
    features: &Array2<f64>,
    query_row: usize,
    candidate_rows: &[usize],
    k: usize,
) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    if candidate_rows.contains(&query_row) {
        return Err(Error::Argument(format!(
            "candidate set must exclude the query row {query_row}"
        )));
    }
    if candidate_rows.len() < k {
        return Err(Error::InsufficientData(format!(
            "need at least {k} neighbor candidates, have {}",
            candidate_rows.len()
        )));
    }
    let query = features.row(query_row);
    let mut scored: Vec<(f64, usize)> = candidate_rows
        .iter()
        .map(|&r| {
            let d2 = features
                .row(r)
                .iter()
                .zip(query.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            (d2, r)
        })
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(k).map(|(_, r)| r).collect())
}

/// Oversample every minority class up to the majority count.
///
/// The output keeps all original rows first (unchanged, original order) and
/// appends synthetic rows grouped by ascending class index. Every class must
/// have at least two samples; k is clamped to class_size - 1.
pub fn smote_balance(ds: &LabeledDataset, cfg: &SmoteConfig) -> Result<LabeledDataset> {
    if cfg.k_neighbors == 0 {
        return Err(Error::Argument("k_neighbors must be at least 1".into()));
    }
    let counts = class_counts(ds);
    let majority = counts.iter().copied().max().unwrap_or(0);
    if let Some(c) = counts.iter().position(|&n| n < 2) {
        return Err(Error::InsufficientData(format!(
            "class {} ({}) has {} sample(s); SMOTE needs at least 2 per class",
            c, ds.class_names[c], counts[c]
        )));
    }
    if counts.iter().all(|&n| n == majority) {
        return Ok(ds.clone());
    }

    let d = ds.n_features();
    let mut synth_rows: Vec<Vec<f64>> = Vec::new();
    let mut synth_labels: Vec<usize> = Vec::new();

    for (class, &count) in counts.iter().enumerate() {
        let need = majority - count;
        if need == 0 {
            continue;
        }
        let members: Vec<usize> = (0..ds.len()).filter(|&r| ds.labels[r] == class).collect();
        let k = cfg.k_neighbors.min(members.len() - 1);

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(class as u64);
        let mut neighbor_cache: HashMap<usize, Vec<usize>> = HashMap::new();

        for _ in 0..need {
            let source = members[rng.gen_range(0..members.len())];
            let neighbors = match neighbor_cache.get(&source) {
                Some(n) => n.clone(),
                None => {
                    let candidates: Vec<usize> =
                        members.iter().copied().filter(|&r| r != source).collect();
                    let n = knn_indices(&ds.features, source, &candidates, k)?;
                    neighbor_cache.insert(source, n.clone());
                    n
                }
            };
            let nn = neighbors[rng.gen_range(0..neighbors.len())];
            let lambda: f64 = rng.gen(); // [0, 1)
            let row: Vec<f64> = (0..d)
                .map(|j| {
                    let a = ds.features[(source, j)];
                    let b = ds.features[(nn, j)];
                    a + lambda * (b - a)
                })
                .collect();
            synth_rows.push(row);
            synth_labels.push(class);
        }
    }

    let total = ds.len() + synth_rows.len();
    let mut features = Array2::zeros((total, d));
    for r in 0..ds.len() {
        features.row_mut(r).assign(&ds.features.row(r));
    }
    for (i, row) in synth_rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            features[(ds.len() + i, j)] = *v;
        }
    }
    let mut labels = ds.labels.clone();
    labels.extend(synth_labels);
    LabeledDataset::new(features, labels, ds.class_names.clone())
}
