//! The `train` subcommand: load -> (featurize) -> split -> (SMOTE) -> fit,
//! then write metrics CSV, confusion matrices, checkpoint, and manifest.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

use qdress_core::{
    fit, hash_featurize, load_dataset, make_batches, smote_balance, split, Checkpoint, DataFormat,
    DressedModel, LabeledDataset, LoadedData, LoraDressedModel, Model, OptimizerKind, Phase,
    QuantumLayerConfig, SmoteConfig, SplitSpec, TrainConfig, MAX_QUBITS,
};

use crate::manifest::{
    sha256_hex, unix_ms_now, Artifacts, DataInfo, LoraInfo, ResolvedConfig, RunManifest, SmoteInfo,
    Timings,
};
use crate::report::{write_metrics_csv, write_train_confusion};
use crate::{CliError, TrainArgs};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn validate(args: &TrainArgs) -> Result<(DataFormat, f64), CliError> {
    let format = DataFormat::parse(&args.format).map_err(|e| usage(e.to_string()))?;
    if args.epochs == 0 {
        return Err(usage("--epochs must be at least 1"));
    }
    if args.n_qubits == 0 || args.n_qubits > MAX_QUBITS {
        return Err(usage(format!("--n-qubits must lie in 1..={MAX_QUBITS}")));
    }
    if args.depth > 64 {
        return Err(usage("--depth must be at most 64"));
    }
    if args.batch_size == 0 {
        return Err(usage("--batch-size must be at least 1"));
    }
    if !(args.train_fraction > 0.0 && args.train_fraction < 1.0) {
        return Err(usage("--train-fraction must lie strictly between 0 and 1"));
    }
    if args.smote_k == 0 {
        return Err(usage("--smote-k must be at least 1"));
    }
    if args.lora_r == 0 {
        return Err(usage("--lora-r must be at least 1"));
    }
    if !(args.lora_alpha.is_finite() && args.lora_alpha > 0.0) {
        return Err(usage("--lora-alpha must be positive"));
    }
    if !(0.0..1.0).contains(&args.lora_dropout) {
        return Err(usage("--lora-dropout must lie in [0, 1)"));
    }
    if args.featurize_dim < 8 {
        return Err(usage("--featurize-dim must be at least 8"));
    }
    let lr = args.lr.unwrap_or(match args.optimizer {
        crate::OptimizerArg::Sgd => 0.05,
        crate::OptimizerArg::Adam => 0.001,
    });
    if !(lr.is_finite() && lr > 0.0) {
        return Err(usage("--lr must be positive"));
    }
    Ok((format, lr))
}

fn load(args: &TrainArgs, format: DataFormat) -> Result<LabeledDataset, CliError> {
    let ds = match load_dataset(&args.data, format)? {
        LoadedData::Dataset(ds) => ds,
        LoadedData::Records(records) => hash_featurize(&records, args.featurize_dim)?,
    };
    Ok(ds)
}

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
    let (format, lr) = validate(args)?;
    let started = unix_ms_now();
    let t_total = Instant::now();

    let t_load = Instant::now();
    let sha256 = sha256_hex(&args.data)?;
    let ds = load(args, format)?;
    let load_seconds = t_load.elapsed().as_secs_f64();

    let spec = SplitSpec {
        train_fraction: args.train_fraction,
        stratified: true,
        seed: args.seed,
    };
    let (mut train_split, validation) = split(&ds, &spec)?;
    if args.smote {
        let cfg = SmoteConfig { k_neighbors: args.smote_k, seed: args.seed };
        train_split = smote_balance(&train_split, &cfg)?;
    }
    let batches = make_batches(train_split.len(), args.batch_size, args.seed)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let qconfig = QuantumLayerConfig::new(args.n_qubits, args.depth)
        .map_err(|e| usage(e.to_string()))?;
    let plain = DressedModel::seeded(ds.n_features(), qconfig, ds.n_classes(), &mut rng);
    let mut model = if args.lora {
        Model::Lora(LoraDressedModel::wrap(
            plain,
            args.lora_r,
            args.lora_alpha,
            args.lora_dropout,
            &mut rng,
        )?)
    } else {
        Model::Plain(plain)
    };

    let cfg = TrainConfig {
        epochs: args.epochs,
        learning_rate: lr,
        optimizer: args.optimizer.into(),
        seed: args.seed,
        use_lora: args.lora,
        use_smote: args.smote,
    };

    let t_train = Instant::now();
    let report = fit(&mut model, &train_split, &batches, &validation, &cfg)?;
    let train_seconds = t_train.elapsed().as_secs_f64();

    for epoch in 1..=args.epochs {
        let find = |phase: Phase| {
            report
                .records
                .iter()
                .find(|r| r.epoch == epoch && r.phase == phase)
                .expect("one record per phase per epoch")
        };
        let t = find(Phase::Train);
        let v = find(Phase::Validation);
        println!(
            "epoch {:>3}/{} | train acc {:.4} loss {:.4} mae {:.4} | val acc {:.4} loss {:.4} mae {:.4}",
            epoch, args.epochs, t.accuracy, t.loss, t.mae, v.accuracy, v.loss, v.mae
        );
    }

    std::fs::create_dir_all(&args.out).map_err(qdress_core::Error::Io)?;
    let metrics_path = args.out.join("metrics.csv");
    let confusion_path = args.out.join("confusion.json");
    let checkpoint_path = args.out.join("checkpoint.json");
    let manifest_path = args.out.join("manifest.json");

    write_metrics_csv(&metrics_path, &report.records)?;
    write_train_confusion(
        &confusion_path,
        &ds.class_names,
        &report.train_confusion,
        &report.validation_confusion,
    )?;
    Checkpoint::new(args.seed, ds.class_names.clone(), model).save(&checkpoint_path)?;

    let optimizer_name = match cfg.optimizer {
        OptimizerKind::Sgd => "sgd",
        OptimizerKind::Adam => "adam",
    };
    RunManifest {
        command: "train".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        started_unix_ms: started,
        data: DataInfo {
            path: args.data.clone(),
            sha256,
            format: args.format.clone(),
            featurize_dim: matches!(format, DataFormat::RawTextCsv).then_some(args.featurize_dim),
        },
        config: ResolvedConfig {
            n_qubits: args.n_qubits,
            depth: args.depth,
            epochs: args.epochs,
            learning_rate: lr,
            optimizer: optimizer_name.into(),
            batch_size: args.batch_size,
            seed: args.seed,
            train_fraction: args.train_fraction,
            smote: SmoteInfo { enabled: args.smote, k_neighbors: args.smote_k },
            lora: LoraInfo {
                enabled: args.lora,
                rank: args.lora_r,
                alpha: args.lora_alpha,
                dropout: args.lora_dropout,
            },
        },
        artifacts: Artifacts {
            metrics_csv: metrics_path.clone(),
            confusion_json: confusion_path,
            checkpoint_json: checkpoint_path,
        },
        timings: Timings {
            load_seconds,
            train_seconds,
            total_seconds: t_total.elapsed().as_secs_f64(),
        },
    }
    .write(&manifest_path)?;

    println!("artifacts written to {}", args.out.display());
    Ok(())
}
