//! Evaluation metrics: accuracy, mean absolute label error, confusion matrix.

use crate::error::{Error, Result};

fn check_lengths(preds: &[usize], labels: &[usize]) -> Result<()> {
    if preds.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} predictions vs {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Argument("metrics need at least one sample".into()));
    }
    Ok(())
}

/// Fraction of predictions equal to their label.
pub fn accuracy(preds: &[usize], labels: &[usize]) -> Result<f64> {
    check_lengths(preds, labels)?;
    let correct = preds.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(correct as f64 / preds.len() as f64)
}

/// Mean |pred - label| over integer class indices.
pub fn mae(preds: &[usize], labels: &[usize]) -> Result<f64> {
    check_lengths(preds, labels)?;
    let total: u64 = preds
        .iter()
        .zip(labels)
        .map(|(&p, &l)| p.abs_diff(l) as u64)
        .sum();
    Ok(total as f64 / preds.len() as f64)
}

/// C x C tally; entry [true][pred]. Empty inputs give the zero matrix.
pub fn confusion_matrix(preds: &[usize], labels: &[usize], n_classes: usize) -> Result<Vec<Vec<usize>>> {
    if preds.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} predictions vs {} labels",
            preds.len(),
            labels.len()
        )));
    }
    let mut matrix = vec![vec![0usize; n_classes]; n_classes];
    for (&p, &l) in preds.iter().zip(labels) {
        if p >= n_classes {
            return Err(Error::InvalidClass { class: p, n_classes });
        }
        if l >= n_classes {
            return Err(Error::InvalidClass { class: l, n_classes });
        }
        matrix[l][p] += 1;
    }
    Ok(matrix)
}
