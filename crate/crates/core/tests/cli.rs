use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use synlearn::data::{read_dataset_csv, read_json, read_pgm};
use synlearn::fnn::SlfnModel;

fn synlearn(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synlearn"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SYNLEARN_SEED")
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> Value {
    read_json(&dir.join("run.json")).unwrap()
}

fn assert_manifest_complete(dir: &Path) {
    let m = manifest(dir);
    for a in m["artifacts"].as_array().unwrap() {
        let path = dir.join(a.as_str().unwrap());
        assert!(path.is_file(), "{} missing", path.display());
    }
    assert!(!dir.join("FAILED").exists());
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn help_lists_every_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synlearn(&["--help"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["ensemble", "gmm-select", "fnn-train", "rd-sim", "gen-data"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synlearn(&["frobnicate"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().count(), 0);
}

#[test]
fn k_max_above_sample_count_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert!(synlearn(
        &["gen-data", "--blobs", "k=2", "n=5", "--output-dir", "data"],
        tmp.path()
    )
    .status
    .success());
    std::fs::write(
        tmp.path().join("cfg.json"),
        r#"{"k_max": 50, "input": "data/data.csv"}"#,
    )
    .unwrap();
    let out = synlearn(
        &["gmm-select", "--config", "cfg.json", "--output-dir", "sel"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("sel").exists());
    assert!(data.join("data.csv").is_file());
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"energies": [0, 1], "betta": 2}"#).unwrap();
    let out = synlearn(&["ensemble", "--config", "cfg.json", "--output-dir", "o"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("cfg.json"),
        r#"{"energies": [0, 1, 3], "beta": 2.0, "seed": 9, "output_dir": "from-file"}"#,
    )
    .unwrap();
    let out = synlearn(&["ensemble", "--config", "cfg.json", "--beta", "0.5"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("from-file");
    let m = manifest(&dir);
    assert_eq!(m["seed"], 9);
    assert_eq!(m["params"]["beta"], 0.5);
    assert_eq!(m["params"]["k_b"], 1.0);
    assert_eq!(m["params"]["energies"], serde_json::json!([0.0, 1.0, 3.0]));
    let thermo: Value = read_json(&dir.join("thermo.json")).unwrap();
    assert_eq!(thermo["temperature"], 2.0);
    let z = 1.0 + (-0.5f64).exp() + (-1.5f64).exp();
    assert!((thermo["report"]["free_energy"].as_f64().unwrap() + 2.0 * z.ln()).abs() < 1e-12);
    assert_manifest_complete(&dir);
}

#[test]
fn seed_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_synlearn"))
        .args(["gen-data", "--output-dir", "o"])
        .current_dir(tmp.path())
        .env("SYNLEARN_SEED", "17")
        .output()
        .unwrap();
    assert!(out.status.success());
    let m = manifest(&tmp.path().join("o"));
    assert_eq!(m["seed"], 17);
    assert_eq!(m["params"]["blobs"]["seed"], 17);
}

#[test]
fn gen_data_writes_labelled_blobs_and_regression_sets() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synlearn(
        &[
            "gen-data",
            "--blobs",
            "k=4",
            "n=10",
            "d=3",
            "--regression",
            "fn=sine",
            "n=12",
            "lo=-1",
            "hi=1",
            "--output-dir",
            "o",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("o");
    let d = read_dataset_csv(&dir.join("data.csv")).unwrap();
    assert_eq!((d.len(), d.dim()), (40, 3));
    assert_eq!(d.labels().unwrap().iter().max(), Some(&3));
    let (_, x) = synlearn::data::read_matrix_csv(&dir.join("inputs.csv")).unwrap();
    assert_eq!(x.nrows(), 12);
    assert!(x.iter().all(|v| (-1.0..=1.0).contains(v)));
    assert_manifest_complete(&dir);

    let bad = synlearn(&["gen-data", "--blobs", "k=0", "--output-dir", "bad"], tmp.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(!tmp.path().join("bad").exists());
}

#[test]
fn fnn_train_outputs_a_loadable_model() {
    let tmp = tempfile::tempdir().unwrap();
    for trainer in ["gd", "pil"] {
        let out = synlearn(
            &[
                "fnn-train",
                "--trainer",
                trainer,
                "--h",
                "auto",
                "--epochs",
                "40",
                "--hidden",
                "8",
                "--output-dir",
                trainer,
            ],
            tmp.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let dir = tmp.path().join(trainer);
        let model: SlfnModel = read_json(&dir.join("model.json")).unwrap();
        assert_eq!((model.input_dim(), model.hidden_dim(), model.output_dim()), (1, 8, 1));
        let trace = std::fs::read_to_string(dir.join("loss_trace.csv")).unwrap();
        assert!(trace.starts_with("epoch,total,sse,h\n"));
        let rows = trace.lines().count() - 1;
        assert_eq!(rows, if trainer == "gd" { 41 } else { 1 });
        assert_manifest_complete(&dir);
    }
}

#[test]
fn fnn_train_reads_csv_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(
        synlearn(&["gen-data", "--regression", "n=30", "--output-dir", "d"], tmp.path())
            .status
            .success()
    );
    let out = synlearn(
        &[
            "fnn-train",
            "--inputs",
            "d/inputs.csv",
            "--targets",
            "d/targets.csv",
            "--h",
            "0.01",
            "--epochs",
            "10",
            "--output-dir",
            "o",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let loss: Value = read_json(&tmp.path().join("o/loss.json")).unwrap();
    assert_eq!(loss["n_samples"], 30);
    assert_eq!(loss["h_final"], 0.01);

    let missing = synlearn(
        &["fnn-train", "--inputs", "d/inputs.csv", "--output-dir", "m"],
        tmp.path(),
    );
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn divergence_leaves_a_failed_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synlearn(
        &["fnn-train", "--lr", "1e12", "--epochs", "20", "--output-dir", "o"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(tmp.path().join("o/FAILED").is_file());
    assert!(!tmp.path().join("o/run.json").exists());

    // a later successful run clears the marker
    let ok = synlearn(&["fnn-train", "--epochs", "2", "--output-dir", "o"], tmp.path());
    assert!(ok.status.success());
    assert!(!tmp.path().join("o/FAILED").exists());
}

#[test]
fn rd_sim_writes_snapshots_and_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("rd.json"),
        r#"{"grid": [32, 32], "dx": 0.0078125, "steps": 200, "snapshot_every": 100, "init": {"kind": "seeded_square", "size": 6}}"#,
    )
    .unwrap();
    let out = synlearn(
        &["rd-sim", "--config", "rd.json", "--csv-grids", "--output-dir", "o"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("o");
    let (w, h, px) = read_pgm(&dir.join("snapshots/v_000200.pgm")).unwrap();
    assert_eq!((w, h, px.len()), (32, 32, 1024));
    let metrics = std::fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 4);
    assert!(dir.join("snapshots/u_000100.csv").is_file());
    assert_manifest_complete(&dir);

    std::fs::write(
        tmp.path().join("ac.json"),
        r#"{"model": "gradient_flow", "grid": [64], "steps": 500, "snapshot_every": 250}"#,
    )
    .unwrap();
    let out = synlearn(&["rd-sim", "--config", "ac.json", "--output-dir", "ac"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let energies: Vec<f64> = std::fs::read_to_string(tmp.path().join("ac/metrics.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(energies.len(), 3);
    assert!(
        energies.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)),
        "{energies:?}"
    );
}

#[test]
fn rd_sim_rejects_unstable_time_steps() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synlearn(
        &["rd-sim", "--dt-factor", "1.5", "--steps", "1", "--output-dir", "o"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn replays_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("rd.json"), r#"{"grid": [24, 24], "dx": 0.0078125, "steps": 60, "snapshot_every": 30, "init": {"kind": "random", "amplitude": 0.3}}"#).unwrap();
    for dir in ["a", "b"] {
        assert!(synlearn(
            &["rd-sim", "--config", "rd.json", "--seed", "5", "--output-dir", dir],
            tmp.path()
        )
        .status
        .success());
        assert!(synlearn(
            &["fnn-train", "--epochs", "15", "--seed", "5", "--output-dir", dir],
            tmp.path()
        )
        .status
        .success());
    }
    for f in [
        "snapshots/u_000060.pgm",
        "snapshots/v_000030.json",
        "metrics.csv",
        "model.json",
        "loss_trace.csv",
        "loss.json",
    ] {
        let a = std::fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}
