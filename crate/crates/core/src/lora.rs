//! Low-rank adaptation of a frozen linear layer.
//!
//! The base layer never trains. The adapter path adds (alpha/rank) · A · B
//! on top, with A Gaussian-initialized (std 0.02) and B zero so a fresh
//! adapter is an exact identity over the base. Dropout regularizes only the
//! adapter-path input, inverted-scaled by 1/(1-p) so eval needs no rescale;
//! the base path always sees the raw input. Bias is carried by the base and
//! never adapted.

use ndarray::{Array1, Array2, ArrayView1};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classical::LinearLayer;
use crate::error::{Error, Result};

/// Per-coordinate multiplier applied to the adapter-path input: 0 for a
/// dropped coordinate, 1/(1-p) for a survivor, 1 everywhere in eval mode.
/// Forward and backward must see the same mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    factors: Array1<f64>,
}

impl DropoutMask {
    pub fn identity(len: usize) -> Self {
        DropoutMask { factors: Array1::ones(len) }
    }

    pub fn factors(&self) -> &Array1<f64> {
        &self.factors
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraAdapter {
    pub base: LinearLayer,
    /// out_dim x rank
    pub a: Array2<f64>,
    /// rank x in_dim
    pub b: Array2<f64>,
    pub rank: usize,
    pub alpha: f64,
    pub dropout_p: f64,
    pub training: bool,
}

/// Gradients of the adapter path; the frozen base contributes none by
/// construction. `input` carries d loss / d x for chaining into earlier
/// layers (the base path is included there).
#[derive(Debug, Clone)]
pub struct LoraBackward {
    pub grad_a: Array2<f64>,
    pub grad_b: Array2<f64>,
    pub grad_input: Array1<f64>,
}

impl LoraAdapter {
    pub fn new(
        base: LinearLayer,
        rank: usize,
        alpha: f64,
        dropout_p: f64,
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Argument("LoRA rank must be at least 1".into()));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Argument(format!("LoRA alpha must be positive, got {alpha}")));
        }
        if !(0.0..1.0).contains(&dropout_p) {
            return Err(Error::Argument(format!(
                "LoRA dropout must lie in [0, 1), got {dropout_p}"
            )));
        }
        let normal = Normal::new(0.0, 0.02).expect("finite std");
        let a = Array2::from_shape_fn((base.out_dim(), rank), |_| normal.sample(rng));
        let b = Array2::zeros((rank, base.in_dim()));
        Ok(LoraAdapter { base, a, b, rank, alpha, dropout_p, training: false })
    }

    pub fn in_dim(&self) -> usize {
        self.base.in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.base.out_dim()
    }

    pub fn scaling(&self) -> f64 {
        self.alpha / self.rank as f64
    }

    /// Draw a dropout mask for one forward/backward pair. Identity unless
    /// the adapter is in training mode with p > 0.
    pub fn sample_mask(&self, rng: &mut impl rand::Rng) -> DropoutMask {
        if !self.training || self.dropout_p == 0.0 {
            return DropoutMask::identity(self.in_dim());
        }
        let keep = 1.0 - self.dropout_p;
        let factors = Array1::from_shape_fn(self.in_dim(), |_| {
            if rng.gen::<f64>() < self.dropout_p {
                0.0
            } else {
                1.0 / keep
            }
        });
        DropoutMask { factors }
    }

    fn check_mask(&self, mask: &DropoutMask) -> Result<()> {
        if mask.factors.len() != self.in_dim() {
            return Err(Error::MaskMismatch(format!(
                "mask length {} does not match input dimension {}",
                mask.factors.len(),
                self.in_dim()
            )));
        }
        Ok(())
    }

    /// base(x) + (alpha/rank) · A · (B · (mask ⊙ x)).
    pub fn forward(&self, x: ArrayView1<f64>, mask: &DropoutMask) -> Result<Array1<f64>> {
        self.check_mask(mask)?;
        let mut y = self.base.forward(x)?;
        let dropped = &mask.factors * &x;
        let low = self.b.dot(&dropped);
        y = y + self.scaling() * self.a.dot(&low);
        Ok(y)
    }

    /// Eval-mode forward (identity mask).
    pub fn forward_eval(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.forward(x, &DropoutMask::identity(self.in_dim()))
    }

    /// Collapse the adapter into a plain layer: W' = W + (alpha/rank)·A·B,
    /// bias untouched.
    pub fn merge(&self) -> LinearLayer {
        let merged = &self.base.weights + self.scaling() * self.a.dot(&self.b);
        LinearLayer { weights: merged, bias: self.base.bias.clone() }
    }

    /// Chain rule through the scaled low-rank path, reusing the forward's
    /// mask. Base weights and bias receive no gradient.
    pub fn backward(
        &self,
        x: ArrayView1<f64>,
        upstream: ArrayView1<f64>,
        mask: &DropoutMask,
    ) -> Result<LoraBackward> {
        self.check_mask(mask)?;
        if x.len() != self.in_dim() {
            return Err(Error::Shape(format!(
                "input length {} does not match adapter input dimension {}",
                x.len(),
                self.in_dim()
            )));
        }
        if upstream.len() != self.out_dim() {
            return Err(Error::Shape(format!(
                "upstream length {} does not match adapter output dimension {}",
                upstream.len(),
                self.out_dim()
            )));
        }
        let s = self.scaling();
        let dropped = &mask.factors * &x;
        let low = self.b.dot(&dropped); // rank vector

        // out = base(x) + s·A·(B·u), u = mask ⊙ x
        let mut grad_a = Array2::zeros(self.a.dim());
        for i in 0..self.out_dim() {
            for r in 0..self.rank {
                grad_a[(i, r)] = s * upstream[i] * low[r];
            }
        }
        let d_low = s * self.a.t().dot(&upstream); // rank vector
        let mut grad_b = Array2::zeros(self.b.dim());
        for r in 0..self.rank {
            for j in 0..self.in_dim() {
                grad_b[(r, j)] = d_low[r] * dropped[j];
            }
        }
        // grad through both paths: base W^T up + mask ⊙ (B^T d_low)
        let adapter_path = &mask.factors * &self.b.t().dot(&d_low);
        let grad_input = self.base.weights.t().dot(&upstream) + adapter_path;

        Ok(LoraBackward { grad_a, grad_b, grad_input })
    }
}
