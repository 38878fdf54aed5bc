//! `qdress` — train and evaluate dressed quantum network text classifiers.
//!
//! Exit codes: 0 success, 1 data/runtime error, 2 usage error, 3 training
//! divergence.

mod eval;
mod manifest;
mod report;
mod train;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use qdress_core::OptimizerKind;

#[derive(Parser)]
#[command(name = "qdress", version, about = "Hybrid classical-quantum text classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OptimizerArg {
    Sgd,
    Adam,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(v: OptimizerArg) -> Self {
        match v {
            OptimizerArg::Sgd => OptimizerKind::Sgd,
            OptimizerArg::Adam => OptimizerKind::Adam,
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct TrainArgs {
    /// Input dataset file
    #[arg(long)]
    data: PathBuf,
    /// Input format: embedding-csv, jsonl, or raw-text-csv
    #[arg(long, default_value = "embedding-csv")]
    format: String,
    /// Feature width of the hashed bag-of-words fallback (raw-text-csv only)
    #[arg(long, default_value_t = 768)]
    featurize_dim: usize,
    /// Qubits in the quantum layer (also the pre-net output width)
    #[arg(long, default_value_t = 4)]
    n_qubits: usize,
    /// Entangling + rotation blocks in the circuit
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    /// Learning rate; defaults to 0.05 for sgd, 0.001 for adam
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Sgd)]
    optimizer: OptimizerArg,
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Balance the training split with SMOTE
    #[arg(long, overrides_with = "no_smote")]
    smote: bool,
    #[arg(long = "no-smote", hide = true)]
    no_smote: bool,
    /// Neighbors considered per SMOTE interpolation
    #[arg(long, default_value_t = 5)]
    smote_k: usize,
    /// Train LoRA adapters instead of the full weight set
    #[arg(long, overrides_with = "no_lora")]
    lora: bool,
    #[arg(long = "no-lora", hide = true)]
    no_lora: bool,
    #[arg(long, default_value_t = 8)]
    lora_r: usize,
    #[arg(long, default_value_t = 16.0)]
    lora_alpha: f64,
    #[arg(long, default_value_t = 0.6)]
    lora_dropout: f64,
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Output directory for metrics, confusion matrices, checkpoint, manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(clap::Args, Debug)]
pub struct EvalArgs {
    /// Checkpoint written by `qdress train`
    #[arg(long)]
    checkpoint: PathBuf,
    /// Dataset to evaluate
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "embedding-csv")]
    format: String,
    /// Output directory for the confusion matrix
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a model and write metrics, confusion matrices, and a checkpoint
    Train(TrainArgs),
    /// Evaluate a checkpoint against a dataset
    Eval(EvalArgs),
}

/// Failures sorted by the exit code they map to.
pub enum CliError {
    /// Bad flags or flag combinations -> exit 2.
    Usage(String),
    /// Anything the data or runtime rejected -> exit 1 (divergence -> 3).
    Run(qdress_core::Error),
}

impl From<qdress_core::Error> for CliError {
    fn from(e: qdress_core::Error) -> Self {
        CliError::Run(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => train::run(&args),
        Command::Eval(args) => eval::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            if matches!(e, qdress_core::Error::Divergence { .. }) {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
