//! Classical halves of the dressed network: the pre-net that squeezes
//! features down to wire count, the post-net that maps expectations to class
//! logits, softmax cross-entropy, and exact manual backpropagation through
//! the whole sandwich (parameter-shift supplies the quantum piece).

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlayer::{
    param_shift_grad, quantum_forward, CircuitParams, QuantumLayerConfig, PARAM_SHIFT,
};

/// Affine map y = W x + b with an optional bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearLayer {
    pub weights: Array2<f64>,
    pub bias: Option<Array1<f64>>,
}

impl LinearLayer {
    pub fn new(weights: Array2<f64>, bias: Option<Array1<f64>>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Argument("layer weights contain a non-finite entry".into()));
        }
        if let Some(b) = &bias {
            if b.len() != weights.nrows() {
                return Err(Error::Shape(format!(
                    "bias length {} does not match output dimension {}",
                    b.len(),
                    weights.nrows()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::Argument("layer bias contains a non-finite entry".into()));
            }
        }
        Ok(LinearLayer { weights, bias })
    }

    /// Fan-in scaled uniform init in [-1/sqrt(in_dim), 1/sqrt(in_dim)].
    pub fn seeded(out_dim: usize, in_dim: usize, with_bias: bool, rng: &mut impl rand::Rng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weights = Array2::from_shape_fn((out_dim, in_dim), |_| rng.gen_range(-bound..bound));
        let bias = with_bias.then(|| Array1::from_shape_fn(out_dim, |_| rng.gen_range(-bound..bound)));
        LinearLayer { weights, bias }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn forward(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.in_dim() {
            return Err(Error::Shape(format!(
                "linear layer expects input of length {}, got {}",
                self.in_dim(),
                x.len()
            )));
        }
        let mut y = self.weights.dot(&x);
        if let Some(b) = &self.bias {
            y += b;
        }
        Ok(y)
    }
}

/// Softmax probabilities, stabilized by max subtraction.
pub fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Array1<f64> = logits.mapv(|l| (l - max).exp());
    let sum = exp.sum();
    exp / sum
}

/// Cross-entropy of a single sample against its true class.
///
/// Returns the loss -log softmax(logits)[true_class] and the logit gradient
/// softmax(logits) - one_hot(true_class).
pub fn softmax_cross_entropy(
    logits: &Array1<f64>,
    true_class: usize,
) -> Result<(f64, Array1<f64>)> {
    let n_classes = logits.len();
    if true_class >= n_classes {
        return Err(Error::InvalidClass { class: true_class, n_classes });
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum_exp = logits.mapv(|l| (l - max).exp()).sum().ln();
    let loss = -(logits[true_class] - max - log_sum_exp);
    let mut grad = softmax(logits);
    grad[true_class] -= 1.0;
    Ok((loss, grad))
}

/// Pre-net -> tanh·pi/2 embedding -> quantum layer -> post-net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DressedModel {
    pub pre_net: LinearLayer,
    pub qconfig: QuantumLayerConfig,
    pub qparams: CircuitParams,
    pub post_net: LinearLayer,
}

/// Gradients mirroring the parameter shapes of a [`DressedModel`].
#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub pre_weights: Array2<f64>,
    pub pre_bias: Option<Array1<f64>>,
    pub qparams: Array2<f64>,
    pub post_weights: Array2<f64>,
    pub post_bias: Option<Array1<f64>>,
}

/// Intermediate activations kept for the backward pass.
struct ForwardTrace {
    pre_out: Array1<f64>,
    angles: Vec<f64>,
    expectations: Array1<f64>,
    logits: Array1<f64>,
}

impl DressedModel {
    pub fn new(
        pre_net: LinearLayer,
        qconfig: QuantumLayerConfig,
        qparams: CircuitParams,
        post_net: LinearLayer,
    ) -> Result<Self> {
        if pre_net.out_dim() != qconfig.n_qubits() {
            return Err(Error::Shape(format!(
                "pre-net output {} does not match qubit count {}",
                pre_net.out_dim(),
                qconfig.n_qubits()
            )));
        }
        if post_net.in_dim() != qconfig.n_qubits() {
            return Err(Error::Shape(format!(
                "post-net input {} does not match qubit count {}",
                post_net.in_dim(),
                qconfig.n_qubits()
            )));
        }
        if qparams.angles().dim() != (qconfig.depth(), qconfig.n_qubits()) {
            return Err(Error::Shape("circuit params do not match quantum config".into()));
        }
        Ok(DressedModel { pre_net, qconfig, qparams, post_net })
    }

    /// Fresh model with seeded fan-in init for both nets and small random
    /// circuit angles.
    pub fn seeded(
        feature_dim: usize,
        qconfig: QuantumLayerConfig,
        n_classes: usize,
        rng: &mut impl rand::Rng,
    ) -> Self {
        let pre_net = LinearLayer::seeded(qconfig.n_qubits(), feature_dim, true, rng);
        let qparams = CircuitParams::seeded(&qconfig, rng);
        let post_net = LinearLayer::seeded(n_classes, qconfig.n_qubits(), true, rng);
        DressedModel { pre_net, qconfig, qparams, post_net }
    }

    pub fn feature_dim(&self) -> usize {
        self.pre_net.in_dim()
    }

    pub fn n_classes(&self) -> usize {
        self.post_net.out_dim()
    }

    fn trace(&self, features: ArrayView1<f64>) -> Result<ForwardTrace> {
        let pre_out = self.pre_net.forward(features)?;
        let angles = self.qconfig.embed_angles(pre_out.as_slice().expect("contiguous"))?;
        let expectations = Array1::from(quantum_forward(&self.qconfig, &self.qparams, &angles)?);
        let logits = self.post_net.forward(expectations.view())?;
        Ok(ForwardTrace { pre_out, angles, expectations, logits })
    }

    /// Raw class logits; softmax lives inside the loss.
    pub fn forward(&self, features: ArrayView1<f64>) -> Result<Array1<f64>> {
        Ok(self.trace(features)?.logits)
    }

    /// Loss and exact gradients for every parameter group on one sample.
    pub fn backward(&self, features: ArrayView1<f64>, true_class: usize) -> Result<(f64, ModelGrads)> {
        let trace = self.trace(features)?;
        let (loss, grad_logits) = softmax_cross_entropy(&trace.logits, true_class)?;

        // post-net: d W = g ⊗ h, d b = g, d h = W^T g
        let post_weights = outer(&grad_logits, &trace.expectations);
        let post_bias = self.post_net.bias.as_ref().map(|_| grad_logits.clone());
        let d_expect = self.post_net.weights.t().dot(&grad_logits);

        // quantum layer: contract the parameter-shift Jacobian with d h
        let jac = param_shift_grad(&self.qconfig, &self.qparams, &trace.angles)?;
        let n = self.qconfig.n_qubits();
        let mut qgrads = Array2::zeros((self.qconfig.depth(), n));
        for layer in 0..self.qconfig.depth() {
            for q in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += d_expect[k] * jac.by_params[(layer, q, k)];
                }
                qgrads[(layer, q)] = acc;
            }
        }
        let mut d_angles = Array1::zeros(n);
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += d_expect[k] * jac.by_inputs[(j, k)];
            }
            d_angles[j] = acc;
        }

        // embedding: d tanh(z)·pi/2 = pi/2 · (1 - tanh^2(z))
        let d_pre_out: Array1<f64> = d_angles
            .iter()
            .zip(trace.pre_out.iter())
            .map(|(da, z)| da * PARAM_SHIFT * (1.0 - z.tanh().powi(2)))
            .collect();

        let pre_weights = outer(&d_pre_out, &features.to_owned());
        let pre_bias = self.pre_net.bias.as_ref().map(|_| d_pre_out.clone());

        Ok((
            loss,
            ModelGrads { pre_weights, pre_bias, qparams: qgrads, post_weights, post_bias },
        ))
    }
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.len(), b.len()));
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[(i, j)] = a[i] * b[j];
        }
    }
    out
}
