//! Hybrid classical-quantum text classification.
//!
//! The model is a dressed quantum network: a linear pre-net squeezes input
//! features down to one angle per qubit, a variational circuit (Hadamard +
//! RY embedding + CNOT/RY blocks) runs on an exact state-vector simulator,
//! and a linear post-net turns the per-wire Pauli-Z expectations into class
//! logits. Gradients flow through the circuit via the parameter-shift rule,
//! which is exact for RY rotations. Optional extras: LoRA adapters on both
//! classical layers (bases frozen) and SMOTE oversampling to balance skewed
//! class distributions.
//!
//! Everything is deterministic given its seeds; there is no global RNG.

pub mod checkpoint;
pub mod classical;
pub mod dataio;
pub mod dataset;
pub mod error;
pub mod lora;
pub mod metrics;
pub mod oracle;
pub mod qlayer;
pub mod smote;
pub mod statevec;
pub mod trainer;

pub use checkpoint::Checkpoint;
pub use classical::{softmax, softmax_cross_entropy, DressedModel, LinearLayer};
pub use dataio::{
    encode_labels, hash_featurize, load_dataset, make_batches, split, split_and_batch, DataFormat,
    LoadedData, RawRecord, SplitSpec,
};
pub use dataset::LabeledDataset;
pub use error::{Error, Result};
pub use lora::{DropoutMask, LoraAdapter};
pub use metrics::{accuracy, confusion_matrix, mae};
pub use qlayer::{
    param_shift_grad, quantum_forward, CircuitParams, QuantumLayerConfig, PARAM_SHIFT,
};
pub use smote::{class_counts, knn_indices, smote_balance, SmoteConfig};
pub use statevec::{GateOp, StateVector, MAX_QUBITS};
pub use trainer::{
    evaluate_model, fit, FitReport, LoraDressedModel, MetricsRecord, Model, OptimizerKind, Phase,
    TrainConfig,
};
