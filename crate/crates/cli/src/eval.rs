//! The `eval` subcommand: score a checkpoint against a dataset without
//! touching any parameter, print accuracy/loss/MAE, write the confusion
//! matrix.

use qdress_core::{
    evaluate_model, hash_featurize, load_dataset, Checkpoint, DataFormat, Error, LabeledDataset,
    LoadedData,
};

use crate::report::write_eval_confusion;
use crate::{CliError, EvalArgs};

/// Remap the dataset's labels into the checkpoint's class order. Every class
/// seen in the data must exist in the checkpoint.
fn align_classes(ds: LabeledDataset, class_names: &[String]) -> Result<LabeledDataset, Error> {
    if ds.class_names == class_names {
        return Ok(ds);
    }
    let mapping: Vec<usize> = ds
        .class_names
        .iter()
        .map(|name| {
            class_names.iter().position(|c| c == name).ok_or_else(|| {
                Error::Argument(format!(
                    "dataset class {name:?} is unknown to the checkpoint (classes: {class_names:?})"
                ))
            })
        })
        .collect::<Result<_, _>>()?;
    let labels = ds.labels.iter().map(|&l| mapping[l]).collect();
    LabeledDataset::new(ds.features, labels, class_names.to_vec())
}

pub fn run(args: &EvalArgs) -> Result<(), CliError> {
    let format = DataFormat::parse(&args.format).map_err(|e| CliError::Usage(e.to_string()))?;
    let ckpt = Checkpoint::load(&args.checkpoint)?;

    let ds = match load_dataset(&args.data, format)? {
        LoadedData::Dataset(ds) => ds,
        // raw text is featurized at the width the model was trained with
        LoadedData::Records(records) => hash_featurize(&records, ckpt.model.feature_dim())?,
    };
    if ds.n_features() != ckpt.model.feature_dim() {
        return Err(Error::Shape(format!(
            "dimension chains differ: checkpoint expects {} -> {} qubits -> {} classes, \
             dataset provides {} features / {} classes",
            ckpt.model.feature_dim(),
            ckpt.model.qconfig().n_qubits(),
            ckpt.model.n_classes(),
            ds.n_features(),
            ds.n_classes()
        ))
        .into());
    }
    let ds = align_classes(ds, &ckpt.class_names)?;

    let (record, confusion) = evaluate_model(&ckpt.model, &ds)?;
    println!("accuracy={} loss={} mae={}", record.accuracy, record.loss, record.mae);

    std::fs::create_dir_all(&args.out).map_err(Error::Io)?;
    let path = args.out.join("eval_confusion.json");
    write_eval_confusion(&path, &ckpt.class_names, &confusion)?;
    println!("confusion matrix written to {}", path.display());
    Ok(())
}
