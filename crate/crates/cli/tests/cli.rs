//! End-to-end checks of the `qdress` binary: artifact layout, exit codes,
//! reproducibility, and the eval path.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qdress() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qdress"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    qdress().args(args).current_dir(cwd).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Three well-separated clusters, one per class, written as embedding-csv.
fn write_toy_csv(path: &Path, rows_per_class: usize) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let classes = ["worry", "love", "neutral"];
    let mut text = String::from("label,f0,f1,f2,f3\n");
    for (c, name) in classes.iter().enumerate() {
        for _ in 0..rows_per_class {
            let center = c as f64 * 2.0 - 2.0;
            let vals: Vec<String> = (0..4)
                .map(|_| format!("{:.5}", center + rng.gen_range(-0.4..0.4)))
                .collect();
            text.push_str(&format!("{},{}\n", name, vals.join(",")));
        }
    }
    fs::write(path, text).unwrap();
}

fn toy_setup(rows_per_class: usize) -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("toy.csv");
    write_toy_csv(&data, rows_per_class);
    (dir, data)
}

#[test]
fn train_writes_all_artifacts_with_expected_row_count() {
    let (dir, _) = toy_setup(15);
    let out = run(
        &["train", "--data", "toy.csv", "--n-qubits", "2", "--depth", "1", "--epochs", "3",
          "--seed", "7", "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let metrics = fs::read_to_string(dir.path().join("run/metrics.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "epoch,phase,accuracy,loss,mae");
    assert_eq!(lines.len(), 1 + 3 * 2); // header + 3 epochs x 2 phases

    for artifact in ["confusion.json", "checkpoint.json", "manifest.json"] {
        assert!(dir.path().join("run").join(artifact).exists(), "{artifact} missing");
    }

    // one printed line per epoch
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("epoch ")).count(), 3);
}

#[test]
fn identical_seeds_give_byte_identical_metrics() {
    let (dir, _) = toy_setup(10);
    let args = ["train", "--data", "toy.csv", "--n-qubits", "2", "--depth", "1",
                "--epochs", "2", "--seed", "11"];
    let a = run(&[&args[..], &["--out", "a"]].concat(), dir.path());
    let b = run(&[&args[..], &["--out", "b"]].concat(), dir.path());
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let ma = fs::read(dir.path().join("a/metrics.csv")).unwrap();
    let mb = fs::read(dir.path().join("b/metrics.csv")).unwrap();
    assert_eq!(ma, mb);
}

#[test]
fn train_does_not_mutate_its_input() {
    let (dir, data) = toy_setup(8);
    let before = fs::read(&data).unwrap();
    let out = run(
        &["train", "--data", "toy.csv", "--n-qubits", "2", "--depth", "1", "--epochs", "1",
          "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&data).unwrap(), before);
}

#[test]
fn usage_errors_exit_two() {
    let (dir, _) = toy_setup(5);
    for bad in [
        vec!["train", "--data", "toy.csv", "--epochs", "0"],
        vec!["train", "--data", "toy.csv", "--n-qubits", "0"],
        vec!["train", "--data", "toy.csv", "--lr", "0"],
        vec!["train", "--data", "toy.csv", "--train-fraction", "1.0"],
        vec!["train", "--data", "toy.csv", "--lora-dropout", "1.0"],
        vec!["train", "--data", "toy.csv", "--format", "parquet"],
    ] {
        let out = run(&bad, dir.path());
        assert_eq!(code(&out), 2, "args {bad:?} should be a usage error");
    }
    // unknown flag: clap's own usage error
    let out = run(&["train", "--data", "toy.csv", "--frobnicate"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn data_errors_exit_one() {
    let (dir, _) = toy_setup(5);
    let out = run(&["train", "--data", "missing.csv", "--out", "x"], dir.path());
    assert_eq!(code(&out), 1);

    fs::write(dir.path().join("bad.csv"), "label,f0\na,0.5\nb,not_a_number\n").unwrap();
    let out = run(&["train", "--data", "bad.csv", "--out", "x"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = run(&["eval", "--checkpoint", "missing.json", "--data", "toy.csv"], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn eval_rejects_mismatched_dimensions_naming_both_chains() {
    let (dir, _) = toy_setup(8);
    let out = run(
        &["train", "--data", "toy.csv", "--n-qubits", "2", "--depth", "1", "--epochs", "1",
          "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);

    // same labels, wrong feature width
    fs::write(
        dir.path().join("narrow.csv"),
        "label,f0,f1\nworry,0.0,0.1\nlove,1.0,0.9\nneutral,0.4,0.6\n",
    )
    .unwrap();
    let out = run(
        &["eval", "--checkpoint", "run/checkpoint.json", "--data", "narrow.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("4"), "should name the checkpoint chain: {stderr}");
    assert!(stderr.contains("2"), "should name the dataset side: {stderr}");
}

#[test]
fn eval_reproduces_final_train_metrics() {
    let (dir, data) = toy_setup(12);
    let seed = 21;
    let out = run(
        &["train", "--data", "toy.csv", "--n-qubits", "2", "--depth", "1", "--epochs", "3",
          "--seed", "21", "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);

    // rebuild the train split exactly the way cmd_train does
    let loaded = qdress_core::load_dataset(&data, qdress_core::DataFormat::EmbeddingCsv).unwrap();
    let qdress_core::LoadedData::Dataset(ds) = loaded else { panic!() };
    let spec = qdress_core::SplitSpec { train_fraction: 0.8, stratified: true, seed };
    let (train, _) = qdress_core::split(&ds, &spec).unwrap();

    let mut csv = String::from("label,f0,f1,f2,f3\n");
    for r in 0..train.len() {
        let vals: Vec<String> = train.row(r).iter().map(|v| format!("{v}")).collect();
        csv.push_str(&format!("{},{}\n", train.class_names[train.labels[r]], vals.join(",")));
    }
    fs::write(dir.path().join("train_split.csv"), csv).unwrap();

    let out = run(
        &["eval", "--checkpoint", "run/checkpoint.json", "--data", "train_split.csv",
          "--out", "eval"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.lines().find(|l| l.starts_with("accuracy=")).unwrap();
    let mut parts = line.split_whitespace().map(|kv| kv.split('=').nth(1).unwrap());
    let acc: f64 = parts.next().unwrap().parse().unwrap();
    let loss: f64 = parts.next().unwrap().parse().unwrap();
    let mae: f64 = parts.next().unwrap().parse().unwrap();

    let metrics = fs::read_to_string(dir.path().join("run/metrics.csv")).unwrap();
    let last_train = metrics
        .lines()
        .rfind(|l| l.starts_with("3,train,"))
        .unwrap();
    let fields: Vec<&str> = last_train.split(',').collect();
    let (acc_csv, loss_csv, mae_csv): (f64, f64, f64) = (
        fields[2].parse().unwrap(),
        fields[3].parse().unwrap(),
        fields[4].parse().unwrap(),
    );
    assert!((acc - acc_csv).abs() < 1e-9);
    assert!((loss - loss_csv).abs() < 1e-9);
    assert!((mae - mae_csv).abs() < 1e-9);
}

#[test]
fn eval_confusion_row_sums_match_supports() {
    let (dir, _) = toy_setup(9);
    let out = run(
        &["train", "--data", "toy.csv", "--n-qubits", "2", "--depth", "1", "--epochs", "2",
          "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let out = run(
        &["eval", "--checkpoint", "run/checkpoint.json", "--data", "toy.csv", "--out", "eval"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eval/eval_confusion.json")).unwrap())
            .unwrap();
    let matrix = doc["matrix"].as_array().unwrap();
    for row in matrix {
        let sum: u64 = row.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum();
        assert_eq!(sum, 9); // 9 rows per class in the file
    }
}

#[test]
fn raw_text_and_jsonl_paths_train() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("tweet_id,content,sentiment\n");
    for i in 0..12 {
        let (content, label) = if i % 2 == 0 {
            ("happy joyful sunshine wonderful day", "love")
        } else {
            ("sad gloomy rainy terrible loss", "worry")
        };
        text.push_str(&format!("{i},\"{content}\",{label}\n"));
    }
    fs::write(dir.path().join("tweets.csv"), text).unwrap();
    let out = run(
        &["train", "--data", "tweets.csv", "--format", "raw-text-csv", "--featurize-dim", "32",
          "--n-qubits", "2", "--depth", "1", "--epochs", "2", "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let mut jsonl = String::new();
    for i in 0..10 {
        let (x, label) = if i % 2 == 0 { (0.9, "a") } else { (-0.9, "b") };
        jsonl.push_str(&format!(
            "{{\"label\":\"{label}\",\"features\":[{x},{},{x}]}}\n",
            -x
        ));
    }
    fs::write(dir.path().join("data.jsonl"), jsonl).unwrap();
    let out = run(
        &["train", "--data", "data.jsonl", "--format", "jsonl", "--n-qubits", "2", "--depth", "1",
          "--epochs", "2", "--out", "run2"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn smote_and_lora_flags_run_together() {
    let dir = tempfile::tempdir().unwrap();
    // imbalanced: 12 worry vs 4 love
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut text = String::from("label,f0,f1,f2\n");
    for _ in 0..12 {
        text.push_str(&format!("worry,{:.4},{:.4},{:.4}\n", 1.0 + rng.gen_range(-0.3..0.3), 1.0, 0.5));
    }
    for _ in 0..4 {
        text.push_str(&format!("love,{:.4},{:.4},{:.4}\n", -1.0 + rng.gen_range(-0.3..0.3), -1.0, -0.5));
    }
    fs::write(dir.path().join("imb.csv"), text).unwrap();
    let out = run(
        &["train", "--data", "imb.csv", "--n-qubits", "2", "--depth", "1", "--epochs", "2",
          "--smote", "--smote-k", "2", "--lora", "--lora-r", "2", "--out", "run"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // manifest records both switches
    let manifest = fs::read_to_string(dir.path().join("run/manifest.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(doc["config"]["smote"]["enabled"], true);
    assert_eq!(doc["config"]["lora"]["enabled"], true);
    assert!(doc["data"]["sha256"].as_str().unwrap().len() == 64);
}
