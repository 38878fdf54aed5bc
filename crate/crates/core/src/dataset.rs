//! Feature matrix plus integer labels, the unit every pipeline stage
//! consumes and produces.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    /// N x d feature matrix.
    pub features: Array2<f64>,
    /// One class index per row, each in [0, class_names.len()).
    pub labels: Vec<usize>,
    /// Class names in label order.
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, class_names: Vec<String>) -> Result<Self> {
        if labels.len() != features.nrows() {
            return Err(Error::Shape(format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.nrows()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::InvalidClass { class: bad, n_classes: class_names.len() });
        }
        Ok(LabeledDataset { features, labels, class_names })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Array2::zeros((rows.len(), self.n_features()));
        let mut labels = Vec::with_capacity(rows.len());
        for (out, &r) in rows.iter().enumerate() {
            if r >= self.len() {
                return Err(Error::Argument(format!(
                    "row index {r} out of range for dataset of {} rows",
                    self.len()
                )));
            }
            features.row_mut(out).assign(&self.features.row(r));
            labels.push(self.labels[r]);
        }
        LabeledDataset::new(features, labels, self.class_names.clone())
    }
}
