//! Artifact writers: the metrics CSV and confusion-matrix JSON documents.

use qdress_core::{MetricsRecord, Result};
use serde::Serialize;
use std::path::Path;

/// `epoch,phase,accuracy,loss,mae`, one row per phase per epoch. Floats are
/// printed shortest-round-trip, so identical runs produce identical bytes.
pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from("epoch,phase,accuracy,loss,mae\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.epoch, r.phase, r.accuracy, r.loss, r.mae
        ));
    }
    out
}

pub fn write_metrics_csv(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    std::fs::write(path, metrics_csv(records))?;
    Ok(())
}

#[derive(Serialize)]
struct TrainConfusion<'a> {
    class_names: &'a [String],
    train: &'a [Vec<usize>],
    validation: &'a [Vec<usize>],
}

pub fn write_train_confusion(
    path: &Path,
    class_names: &[String],
    train: &[Vec<usize>],
    validation: &[Vec<usize>],
) -> Result<()> {
    let doc = TrainConfusion { class_names, train, validation };
    std::fs::write(path, serde_json::to_string_pretty(&doc).expect("serializable") + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct EvalConfusion<'a> {
    class_names: &'a [String],
    matrix: &'a [Vec<usize>],
}

pub fn write_eval_confusion(path: &Path, class_names: &[String], matrix: &[Vec<usize>]) -> Result<()> {
    let doc = EvalConfusion { class_names, matrix };
    std::fs::write(path, serde_json::to_string_pretty(&doc).expect("serializable") + "\n")?;
    Ok(())
}
