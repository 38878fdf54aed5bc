//! Two-phase training loop: per-batch gradient updates, then a no-update
//! evaluation pass. Both phases report accuracy, mean cross-entropy, and MAE
//! once per epoch; epoch metrics are measured against the parameters
//! standing at the end of the epoch, so re-evaluating a saved model
//! reproduces them.

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{softmax_cross_entropy, DressedModel, ModelGrads};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::lora::{DropoutMask, LoraAdapter, LoraBackward};
use crate::metrics::{accuracy, confusion_matrix, mae};
use crate::qlayer::{param_shift_grad, quantum_forward, CircuitParams, QuantumLayerConfig, PARAM_SHIFT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub use_lora: bool,
    pub use_smote: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 0.05,
            optimizer: OptimizerKind::Sgd,
            seed: 0,
            use_lora: false,
            use_smote: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Train,
    Validation,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Train => write!(f, "train"),
            Phase::Validation => write!(f, "validation"),
        }
    }
}

/// One phase of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub epoch: usize,
    pub phase: Phase,
    pub accuracy: f64,
    pub loss: f64,
    pub mae: f64,
}

/// Dressed network with LoRA adapters wrapping both classical layers. Base
/// weights and biases stay frozen; only A/B factors and the circuit angles
/// train.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraDressedModel {
    pub pre: LoraAdapter,
    pub qconfig: QuantumLayerConfig,
    pub qparams: CircuitParams,
    pub post: LoraAdapter,
}

impl LoraDressedModel {
    /// Wrap an existing plain model in fresh adapters.
    pub fn wrap(
        model: DressedModel,
        rank: usize,
        alpha: f64,
        dropout_p: f64,
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        Ok(LoraDressedModel {
            pre: LoraAdapter::new(model.pre_net, rank, alpha, dropout_p, rng)?,
            qconfig: model.qconfig,
            qparams: model.qparams,
            post: LoraAdapter::new(model.post_net, rank, alpha, dropout_p, rng)?,
        })
    }

    pub fn set_training(&mut self, on: bool) {
        self.pre.training = on;
        self.post.training = on;
    }

    fn forward_masked(
        &self,
        features: ArrayView1<f64>,
        pre_mask: &DropoutMask,
        post_mask: &DropoutMask,
    ) -> Result<LoraTrace> {
        let pre_out = self.pre.forward(features, pre_mask)?;
        let angles = self.qconfig.embed_angles(pre_out.as_slice().expect("contiguous"))?;
        let expectations = Array1::from(quantum_forward(&self.qconfig, &self.qparams, &angles)?);
        let logits = self.post.forward(expectations.view(), post_mask)?;
        Ok(LoraTrace { pre_out, angles, expectations, logits })
    }

    pub fn forward_eval(&self, features: ArrayView1<f64>) -> Result<Array1<f64>> {
        let pre_mask = DropoutMask::identity(self.pre.in_dim());
        let post_mask = DropoutMask::identity(self.post.in_dim());
        Ok(self.forward_masked(features, &pre_mask, &post_mask)?.logits)
    }

    /// Loss and adapter/circuit gradients for one sample under the given
    /// dropout masks.
    pub fn backward(
        &self,
        features: ArrayView1<f64>,
        true_class: usize,
        pre_mask: &DropoutMask,
        post_mask: &DropoutMask,
    ) -> Result<(f64, LoraModelGrads)> {
        let trace = self.forward_masked(features, pre_mask, post_mask)?;
        let (loss, grad_logits) = softmax_cross_entropy(&trace.logits, true_class)?;

        let post_back: LoraBackward =
            self.post.backward(trace.expectations.view(), grad_logits.view(), post_mask)?;
        let d_expect = post_back.grad_input.clone();

        let jac = param_shift_grad(&self.qconfig, &self.qparams, &trace.angles)?;
        let n = self.qconfig.n_qubits();
        let mut qgrads = Array2::zeros((self.qconfig.depth(), n));
        for layer in 0..self.qconfig.depth() {
            for q in 0..n {
                qgrads[(layer, q)] =
                    (0..n).map(|k| d_expect[k] * jac.by_params[(layer, q, k)]).sum();
            }
        }
        let d_angles: Array1<f64> = (0..n)
            .map(|j| (0..n).map(|k| d_expect[k] * jac.by_inputs[(j, k)]).sum())
            .collect();
        let d_pre_out: Array1<f64> = d_angles
            .iter()
            .zip(trace.pre_out.iter())
            .map(|(da, z)| da * PARAM_SHIFT * (1.0 - z.tanh().powi(2)))
            .collect();

        let pre_back = self.pre.backward(features, d_pre_out.view(), pre_mask)?;
        Ok((
            loss,
            LoraModelGrads {
                pre_a: pre_back.grad_a,
                pre_b: pre_back.grad_b,
                qparams: qgrads,
                post_a: post_back.grad_a,
                post_b: post_back.grad_b,
            },
        ))
    }
}

/// Intermediate activations of one masked LoRA forward pass.
struct LoraTrace {
    pre_out: Array1<f64>,
    angles: Vec<f64>,
    expectations: Array1<f64>,
    logits: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct LoraModelGrads {
    pub pre_a: Array2<f64>,
    pub pre_b: Array2<f64>,
    pub qparams: Array2<f64>,
    pub post_a: Array2<f64>,
    pub post_b: Array2<f64>,
}

/// A trainable model: plain (every weight trains) or LoRA-wrapped (adapters
/// and circuit angles train, bases frozen).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Plain(DressedModel),
    Lora(LoraDressedModel),
}

impl Model {
    pub fn feature_dim(&self) -> usize {
        match self {
            Model::Plain(m) => m.pre_net.in_dim(),
            Model::Lora(m) => m.pre.in_dim(),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Model::Plain(m) => m.post_net.out_dim(),
            Model::Lora(m) => m.post.out_dim(),
        }
    }

    pub fn qconfig(&self) -> &QuantumLayerConfig {
        match self {
            Model::Plain(m) => &m.qconfig,
            Model::Lora(m) => &m.qconfig,
        }
    }

    pub fn is_lora(&self) -> bool {
        matches!(self, Model::Lora(_))
    }

    pub fn set_training(&mut self, on: bool) {
        if let Model::Lora(m) = self {
            m.set_training(on);
        }
    }

    /// Eval-mode logits (dropout off).
    pub fn forward_eval(&self, features: ArrayView1<f64>) -> Result<Array1<f64>> {
        match self {
            Model::Plain(m) => m.forward(features),
            Model::Lora(m) => m.forward_eval(features),
        }
    }

    /// Consistency check used after deserializing a checkpoint.
    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Plain(m) => {
                DressedModel::new(
                    m.pre_net.clone(),
                    m.qconfig,
                    m.qparams.clone(),
                    m.post_net.clone(),
                )?;
            }
            Model::Lora(m) => {
                if m.pre.out_dim() != m.qconfig.n_qubits()
                    || m.post.in_dim() != m.qconfig.n_qubits()
                    || m.qparams.angles().dim() != (m.qconfig.depth(), m.qconfig.n_qubits())
                {
                    return Err(Error::Shape("LoRA model dimension chain is inconsistent".into()));
                }
            }
        }
        Ok(())
    }

    fn trainable_len(&self) -> usize {
        match self {
            Model::Plain(m) => {
                let pre = m.pre_net.weights.len() + m.pre_net.bias.as_ref().map_or(0, |b| b.len());
                let post =
                    m.post_net.weights.len() + m.post_net.bias.as_ref().map_or(0, |b| b.len());
                pre + m.qparams.angles().len() + post
            }
            Model::Lora(m) => {
                m.pre.a.len() + m.pre.b.len() + m.qparams.angles().len() + m.post.a.len() + m.post.b.len()
            }
        }
    }

    fn trainable_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.trainable_len());
        match self {
            Model::Plain(m) => {
                out.extend(m.pre_net.weights.iter());
                if let Some(b) = &m.pre_net.bias {
                    out.extend(b.iter());
                }
                out.extend(m.qparams.angles().iter());
                out.extend(m.post_net.weights.iter());
                if let Some(b) = &m.post_net.bias {
                    out.extend(b.iter());
                }
            }
            Model::Lora(m) => {
                out.extend(m.pre.a.iter());
                out.extend(m.pre.b.iter());
                out.extend(m.qparams.angles().iter());
                out.extend(m.post.a.iter());
                out.extend(m.post.b.iter());
            }
        }
        out
    }

    fn set_trainable_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        let fill2 = |arr: &mut Array2<f64>, it: &mut dyn Iterator<Item = f64>| {
            for v in arr.iter_mut() {
                *v = it.next().expect("flat vector matches trainable length");
            }
        };
        match self {
            Model::Plain(m) => {
                fill2(&mut m.pre_net.weights, &mut it);
                if let Some(b) = &mut m.pre_net.bias {
                    for v in b.iter_mut() {
                        *v = it.next().expect("length");
                    }
                }
                fill2(m.qparams.angles_mut(), &mut it);
                fill2(&mut m.post_net.weights, &mut it);
                if let Some(b) = &mut m.post_net.bias {
                    for v in b.iter_mut() {
                        *v = it.next().expect("length");
                    }
                }
            }
            Model::Lora(m) => {
                fill2(&mut m.pre.a, &mut it);
                fill2(&mut m.pre.b, &mut it);
                fill2(m.qparams.angles_mut(), &mut it);
                fill2(&mut m.post.a, &mut it);
                fill2(&mut m.post.b, &mut it);
            }
        }
        assert!(it.next().is_none(), "flat vector longer than trainable set");
    }

    /// Per-sample loss and flattened gradient over the trainable set.
    /// `seed`/`step` drive the dropout mask stream for LoRA models.
    fn backward_flat(
        &self,
        features: ArrayView1<f64>,
        true_class: usize,
        seed: u64,
        step: u64,
    ) -> Result<(f64, Vec<f64>)> {
        match self {
            Model::Plain(m) => {
                let (loss, grads) = m.backward(features, true_class)?;
                Ok((loss, flatten_plain(&grads)))
            }
            Model::Lora(m) => {
                let mut mask_rng = ChaCha8Rng::seed_from_u64(seed);
                mask_rng.set_stream(step);
                let pre_mask = m.pre.sample_mask(&mut mask_rng);
                let post_mask = m.post.sample_mask(&mut mask_rng);
                let (loss, grads) = m.backward(features, true_class, &pre_mask, &post_mask)?;
                Ok((loss, flatten_lora(&grads)))
            }
        }
    }
}

fn flatten_plain(g: &ModelGrads) -> Vec<f64> {
    let mut out = Vec::new();
    out.extend(g.pre_weights.iter());
    if let Some(b) = &g.pre_bias {
        out.extend(b.iter());
    }
    out.extend(g.qparams.iter());
    out.extend(g.post_weights.iter());
    if let Some(b) = &g.post_bias {
        out.extend(b.iter());
    }
    out
}

fn flatten_lora(g: &LoraModelGrads) -> Vec<f64> {
    let mut out = Vec::new();
    out.extend(g.pre_a.iter());
    out.extend(g.pre_b.iter());
    out.extend(g.qparams.iter());
    out.extend(g.post_a.iter());
    out.extend(g.post_b.iter());
    out
}

enum OptimizerState {
    Sgd,
    Adam { m: Vec<f64>, v: Vec<f64>, t: u64 },
}

impl OptimizerState {
    fn new(kind: OptimizerKind, len: usize) -> Self {
        match kind {
            OptimizerKind::Sgd => OptimizerState::Sgd,
            OptimizerKind::Adam => OptimizerState::Adam {
                m: vec![0.0; len],
                v: vec![0.0; len],
                t: 0,
            },
        }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        match self {
            OptimizerState::Sgd => {
                for (p, g) in params.iter_mut().zip(grads) {
                    *p -= lr * g;
                }
            }
            OptimizerState::Adam { m, v, t } => {
                const BETA1: f64 = 0.9;
                const BETA2: f64 = 0.999;
                const EPS: f64 = 1e-8;
                *t += 1;
                let t_f = *t as i32;
                for i in 0..params.len() {
                    m[i] = BETA1 * m[i] + (1.0 - BETA1) * grads[i];
                    v[i] = BETA2 * v[i] + (1.0 - BETA2) * grads[i] * grads[i];
                    let m_hat = m[i] / (1.0 - BETA1.powi(t_f));
                    let v_hat = v[i] / (1.0 - BETA2.powi(t_f));
                    params[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
                }
            }
        }
    }
}

/// Everything `fit` produces: per-epoch metrics plus final confusion
/// matrices for both phases (computed with the trained parameters).
#[derive(Debug, Clone)]
pub struct FitReport {
    pub records: Vec<MetricsRecord>,
    pub train_confusion: Vec<Vec<usize>>,
    pub validation_confusion: Vec<Vec<usize>>,
}

struct EvalOutcome {
    accuracy: f64,
    loss: f64,
    mae: f64,
    preds: Vec<usize>,
}

/// Eval-mode pass over a dataset: mean loss, accuracy, MAE, argmax preds.
fn evaluate(model: &Model, ds: &LabeledDataset) -> Result<EvalOutcome> {
    let mut preds = Vec::with_capacity(ds.len());
    let mut loss_sum = 0.0;
    for r in 0..ds.len() {
        let logits = model.forward_eval(ds.row(r))?;
        let (loss, _) = softmax_cross_entropy(&logits, ds.labels[r])?;
        loss_sum += loss;
        let pred = logits
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite logits"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        preds.push(pred);
    }
    Ok(EvalOutcome {
        accuracy: accuracy(&preds, &ds.labels)?,
        loss: loss_sum / ds.len() as f64,
        mae: mae(&preds, &ds.labels)?,
        preds,
    })
}

/// Train `model` on the given batches, validating once per epoch.
///
/// The validation pass never mutates a parameter. Gradients average over
/// each batch; every update is deterministic given (data, config). A
/// non-finite batch loss aborts with a divergence error naming epoch and
/// batch.
pub fn fit(
    model: &mut Model,
    train: &LabeledDataset,
    batches: &[Vec<usize>],
    validation: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<FitReport> {
    if cfg.epochs == 0 {
        return Err(Error::Argument("epochs must be at least 1".into()));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate >= 0.0) {
        return Err(Error::Argument(format!(
            "learning rate must be finite and non-negative, got {}",
            cfg.learning_rate
        )));
    }
    if cfg.use_lora != model.is_lora() {
        return Err(Error::Argument(
            "use_lora flag does not match the model variant passed to fit".into(),
        ));
    }
    if train.is_empty() || validation.is_empty() {
        return Err(Error::InsufficientData("both splits must be non-empty".into()));
    }
    if train.n_features() != model.feature_dim() || validation.n_features() != model.feature_dim() {
        return Err(Error::Shape(format!(
            "model expects {} features, data has {} (train) / {} (validation)",
            model.feature_dim(),
            train.n_features(),
            validation.n_features()
        )));
    }
    if batches.iter().flatten().any(|&r| r >= train.len()) {
        return Err(Error::Argument("batch index out of range for train split".into()));
    }

    let n_trainable = model.trainable_len();
    let mut optimizer = OptimizerState::new(cfg.optimizer, n_trainable);
    let mut records = Vec::with_capacity(cfg.epochs * 2);
    let mut step: u64 = 0;

    let mut last_train_preds = Vec::new();
    let mut last_val_preds = Vec::new();

    for epoch in 1..=cfg.epochs {
        model.set_training(true);
        for (batch_idx, batch) in batches.iter().enumerate() {
            if batch.is_empty() {
                continue;
            }
            let mut grad_sum = vec![0.0; n_trainable];
            let mut loss_sum = 0.0;
            for &row in batch {
                let (loss, grad) =
                    model.backward_flat(train.row(row), train.labels[row], cfg.seed, step)?;
                step += 1;
                loss_sum += loss;
                for (acc, g) in grad_sum.iter_mut().zip(&grad) {
                    *acc += g;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            if !(loss_sum * scale).is_finite() {
                return Err(Error::Divergence { epoch, batch: batch_idx });
            }
            for g in grad_sum.iter_mut() {
                *g *= scale;
            }
            let mut params = model.trainable_params();
            optimizer.step(&mut params, &grad_sum, cfg.learning_rate);
            model.set_trainable_params(&params);
        }
        model.set_training(false);

        let train_eval = evaluate(model, train)?;
        let val_eval = evaluate(model, validation)?;
        records.push(MetricsRecord {
            epoch,
            phase: Phase::Train,
            accuracy: train_eval.accuracy,
            loss: train_eval.loss,
            mae: train_eval.mae,
        });
        records.push(MetricsRecord {
            epoch,
            phase: Phase::Validation,
            accuracy: val_eval.accuracy,
            loss: val_eval.loss,
            mae: val_eval.mae,
        });
        last_train_preds = train_eval.preds;
        last_val_preds = val_eval.preds;
    }

    let n_classes = model.n_classes();
    Ok(FitReport {
        records,
        train_confusion: confusion_matrix(&last_train_preds, &train.labels, n_classes)?,
        validation_confusion: confusion_matrix(&last_val_preds, &validation.labels, n_classes)?,
    })
}

/// Public wrapper around the eval pass, for checkpoint evaluation.
pub fn evaluate_model(model: &Model, ds: &LabeledDataset) -> Result<(MetricsRecord, Vec<Vec<usize>>)> {
    let out = evaluate(model, ds)?;
    let record = MetricsRecord {
        epoch: 0,
        phase: Phase::Validation,
        accuracy: out.accuracy,
        loss: out.loss,
        mae: out.mae,
    };
    let confusion = confusion_matrix(&out.preds, &ds.labels, model.n_classes())?;
    Ok((record, confusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    /// Seeded Gaussian blobs, one cluster per class.
    fn blob_dataset(
        n_per_class: usize,
        n_classes: usize,
        d: usize,
        spread: f64,
        seed: u64,
    ) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let centers: Vec<Vec<f64>> = (0..n_classes)
            .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let n = n_per_class * n_classes;
        let mut features = Array2::zeros((n, d));
        let mut labels = Vec::with_capacity(n);
        for (c, center) in centers.iter().enumerate() {
            for i in 0..n_per_class {
                let row = c * n_per_class + i;
                for (j, base) in center.iter().enumerate() {
                    features[(row, j)] = base + spread * normal.sample(&mut rng);
                }
                labels.push(c);
            }
        }
        let names = (0..n_classes).map(|c| format!("blob{c}")).collect();
        LabeledDataset::new(features, labels, names).unwrap()
    }

    fn plain_model(seed: u64, d: usize, n_qubits: usize, depth: usize, classes: usize) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qc = QuantumLayerConfig::new(n_qubits, depth).unwrap();
        Model::Plain(DressedModel::seeded(d, qc, classes, &mut rng))
    }

    fn lora_model(seed: u64, d: usize, n_qubits: usize, depth: usize, classes: usize) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let qc = QuantumLayerConfig::new(n_qubits, depth).unwrap();
        let plain = DressedModel::seeded(d, qc, classes, &mut rng);
        Model::Lora(LoraDressedModel::wrap(plain, 2, 4.0, 0.2, &mut rng).unwrap())
    }

    fn simple_setup(seed: u64) -> (Model, LabeledDataset, Vec<Vec<usize>>, LabeledDataset) {
        let ds = blob_dataset(10, 2, 3, 0.3, seed);
        let spec = crate::dataio::SplitSpec { train_fraction: 0.8, stratified: true, seed };
        let sb = crate::dataio::split_and_batch(&ds, &spec, 1, seed).unwrap();
        let model = plain_model(seed, 3, 2, 1, 2);
        (model, sb.train, sb.batches, sb.validation)
    }

    #[test]
    fn zero_learning_rate_leaves_parameters_bitwise_unchanged() {
        let (mut model, train, batches, val) = simple_setup(1);
        let before = model.trainable_params();
        let cfg = TrainConfig { epochs: 3, learning_rate: 0.0, ..Default::default() };
        let report = fit(&mut model, &train, &batches, &val, &cfg).unwrap();
        assert_eq!(model.trainable_params(), before);
        // metrics constant across epochs
        let train_records: Vec<_> =
            report.records.iter().filter(|r| r.phase == Phase::Train).collect();
        for r in &train_records[1..] {
            assert_eq!(r.accuracy, train_records[0].accuracy);
            assert_eq!(r.loss, train_records[0].loss);
        }
    }

    #[test]
    fn validation_never_mutates_parameters() {
        let (model, _, _, val) = simple_setup(2);
        let before = model.trainable_params();
        let _ = evaluate(&model, &val).unwrap();
        assert_eq!(model.trainable_params(), before);
    }

    #[test]
    fn fit_is_deterministic() {
        let (model_a, train, batches, val) = simple_setup(3);
        let mut model_b = model_a.clone();
        let mut model_a = model_a;
        let cfg = TrainConfig { epochs: 4, ..Default::default() };
        let ra = fit(&mut model_a, &train, &batches, &val, &cfg).unwrap();
        let rb = fit(&mut model_b, &train, &batches, &val, &cfg).unwrap();
        assert_eq!(ra.records, rb.records);
        assert_eq!(model_a.trainable_params(), model_b.trainable_params());
    }

    #[test]
    fn separable_blobs_reach_95_percent_within_50_epochs() {
        // 2-class, 2-d, 40 samples, well separated
        let ds = blob_dataset(20, 2, 2, 0.25, 40);
        let spec = crate::dataio::SplitSpec { train_fraction: 0.8, stratified: true, seed: 40 };
        let sb = crate::dataio::split_and_batch(&ds, &spec, 1, 40).unwrap();
        let mut model = plain_model(40, 2, 2, 1, 2);
        let cfg = TrainConfig { epochs: 50, learning_rate: 0.05, ..Default::default() };
        let report = fit(&mut model, &sb.train, &sb.batches, &sb.validation, &cfg).unwrap();
        let best = report
            .records
            .iter()
            .filter(|r| r.phase == Phase::Train)
            .map(|r| r.accuracy)
            .fold(0.0, f64::max);
        assert!(best >= 0.95, "train accuracy only reached {best}");
    }

    #[test]
    fn lora_training_freezes_base_weights() {
        let ds = blob_dataset(8, 2, 4, 0.4, 5);
        let spec = crate::dataio::SplitSpec { train_fraction: 0.75, stratified: true, seed: 5 };
        let sb = crate::dataio::split_and_batch(&ds, &spec, 1, 5).unwrap();
        let mut model = lora_model(5, 4, 2, 1, 2);
        let (pre_base, post_base) = match &model {
            Model::Lora(m) => (m.pre.base.clone(), m.post.base.clone()),
            _ => unreachable!(),
        };
        let cfg = TrainConfig {
            epochs: 3,
            learning_rate: 0.1,
            use_lora: true,
            ..Default::default()
        };
        fit(&mut model, &sb.train, &sb.batches, &sb.validation, &cfg).unwrap();
        match &model {
            Model::Lora(m) => {
                assert_eq!(m.pre.base, pre_base); // bitwise
                assert_eq!(m.post.base, post_base);
                assert!(!m.pre.training, "training mode must be off after fit");
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn adam_also_trains() {
        let (mut model, train, batches, val) = simple_setup(6);
        let cfg = TrainConfig {
            epochs: 5,
            learning_rate: 0.01,
            optimizer: OptimizerKind::Adam,
            ..Default::default()
        };
        let report = fit(&mut model, &train, &batches, &val, &cfg).unwrap();
        let first = &report.records[0];
        let last = report.records.iter().rev().find(|r| r.phase == Phase::Train).unwrap();
        assert!(last.loss <= first.loss + 0.5, "Adam made loss much worse");
        assert!(report.records.iter().all(|r| r.loss.is_finite()));
    }

    #[test]
    fn divergence_is_reported_with_location() {
        // a poisoned weight drives the loss to inf on the first batch
        let (mut model, train, batches, val) = simple_setup(7);
        if let Model::Plain(m) = &mut model {
            m.post_net.weights[(0, 0)] = f64::INFINITY;
        }
        let cfg = TrainConfig { epochs: 5, ..Default::default() };
        match fit(&mut model, &train, &batches, &val, &cfg) {
            Err(Error::Divergence { epoch: 1, batch }) => assert_eq!(batch, 0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn lora_flag_must_match_model() {
        let (mut model, train, batches, val) = simple_setup(8);
        let cfg = TrainConfig { use_lora: true, ..Default::default() };
        assert!(matches!(
            fit(&mut model, &train, &batches, &val, &cfg),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn confusion_totals_match_split_sizes() {
        let (mut model, train, batches, val) = simple_setup(9);
        let cfg = TrainConfig { epochs: 2, ..Default::default() };
        let report = fit(&mut model, &train, &batches, &val, &cfg).unwrap();
        let total: usize = report.train_confusion.iter().flatten().sum();
        assert_eq!(total, train.len());
        let total: usize = report.validation_confusion.iter().flatten().sum();
        assert_eq!(total, val.len());
    }

    #[test]
    fn epoch_metrics_match_a_fresh_eval_of_the_final_model() {
        let (mut model, train, batches, val) = simple_setup(10);
        let cfg = TrainConfig { epochs: 3, ..Default::default() };
        let report = fit(&mut model, &train, &batches, &val, &cfg).unwrap();
        let last_train = report
            .records
            .iter()
            .rev()
            .find(|r| r.phase == Phase::Train)
            .unwrap();
        let (again, _) = evaluate_model(&model, &train).unwrap();
        assert!((again.accuracy - last_train.accuracy).abs() < 1e-12);
        assert!((again.loss - last_train.loss).abs() < 1e-12);
        assert!((again.mae - last_train.mae).abs() < 1e-12);
    }
}
