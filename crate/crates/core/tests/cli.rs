use std::path::Path;
use std::process::{Command, Output};

use bci_featsel::artifact::SCHEMA_VERSION;
use bci_featsel::cli::{load_model, ModelArtifact, ResultsArtifact, SelectionArtifact};
use bci_featsel::data::load_epoch_bundle;
use bci_featsel::preprocess::Standardizer;
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bci-featsel")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Value {
    let out = bin(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_kind(out: &Output) -> String {
    assert!(!out.status.success());
    let line: Value = serde_json::from_slice(&out.stderr).unwrap();
    line["error"].as_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn gen(dir: &Path) -> String {
    let bundle = dir.join("bundle");
    let b = bundle.to_str().unwrap().to_string();
    ok(&[
        "gen-synthetic",
        "--out",
        &b,
        "--seed",
        "4",
        "--subjects",
        "3",
        "--epochs-per-class",
        "12",
        "--channels",
        "4",
        "--planted",
        "1",
    ]);
    b
}

#[test]
fn stages_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path());
    let out = dir.path().join("run");
    let o = out.to_str().unwrap();
    let epochs = load_epoch_bundle(&bundle).unwrap();
    assert_eq!(epochs.n_epochs(), 72);

    ok(&["extract", "--bundle", &bundle, "--out", o, "--task", "I"]);
    assert_eq!(json(&out.join("features.json"))["schema_version"], SCHEMA_VERSION);
    assert_eq!(json(&out.join("descriptors.json"))["descriptors"].as_array().unwrap().len(), 4 * 19);

    let sel = ok(&["select", "--out", o, "--seed", "1", "--variant", "mi", "--threshold", "0.02"]);
    assert_eq!(sel["command"], "select");
    let s: SelectionArtifact = serde_json::from_value(json(&out.join("selection.json"))).unwrap();
    assert!(!s.report.final_subset.is_empty());
    assert_eq!(s.report.final_subset, s.report.stage1_kept);

    ok(&["train", "--out", o, "--seed", "1", "--mlp-epochs", "30"]);
    let (art, model): (ModelArtifact, _) = load_model(&out).unwrap();
    assert_eq!(art.dtype, "f32le");
    assert_eq!(model.input_dim(), art.feature_columns.len());
    assert_eq!(std::fs::metadata(out.join("weights.bin")).unwrap().len() as usize, 4 * art.n_weights);
    assert!(art.training_accuracy > 50.0);
    let _: &Standardizer = &art.standardizer;

    ok(&[
        "evaluate",
        "--bundle",
        &bundle,
        "--out",
        o,
        "--seed",
        "2",
        "--variant",
        "all,mi",
        "--mlp-epochs",
        "30",
    ]);
    let results: ResultsArtifact = serde_json::from_value(json(&out.join("results.json"))).unwrap();
    assert_eq!(results.protocol, "leave_one_subject_out");
    assert_eq!(results.reports.len(), 2);
    assert!(results.config.out.is_none());
    assert_eq!(results.config.mlp_epochs, 30);
    assert!(results.reports.iter().all(|r| r.folds.len() == 3));

    let sal = ok(&["saliency", "--out", o]);
    assert_eq!(sal["outputs"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(out.join("saliency_I_mi_only.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("channel,k,s"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn seed_is_mandatory() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&["gen-synthetic", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(error_kind(&out), "config");
    let bundle = gen(dir.path());
    let out = bin(&["evaluate", "--bundle", &bundle, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(error_kind(&out), "config");
}

#[test]
fn missing_inputs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(error_kind(&bin(&["train", "--out", d, "--seed", "1"])), "missing_artifact");
    assert_eq!(
        error_kind(&bin(&["extract", "--bundle", d, "--out", d, "--task", "I"])),
        "missing_artifact"
    );
    assert_eq!(
        error_kind(&bin(&["evaluate", "--config", &format!("{d}/none.toml"), "--seed", "1"])),
        "missing_artifact"
    );
}

#[test]
fn null_effect_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("null");
    let d = d.to_str().unwrap();
    let args = ["gen-synthetic", "--out", d, "--seed", "1", "--effect-size", "1"];
    assert_eq!(error_kind(&bin(&args)), "invalid_parameter");
    let mut forced = args.to_vec();
    forced.push("--force");
    ok(&forced);
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "bundle = {bundle:?}\nseed = 3\nvariants = [\"mi_only\"]\nmlp_epochs = 10\nmi_threshold = 0.01\n"
        ),
    )
    .unwrap();
    let out = dir.path().join("o");
    ok(&["evaluate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let results: ResultsArtifact = serde_json::from_value(json(&out.join("results.json"))).unwrap();
    assert_eq!(results.seed, 3);
    assert_eq!(results.config.mi_threshold, 0.01);
    assert_eq!(results.reports.len(), 1);

    std::fs::write(&cfg, "seeed = 3\n").unwrap();
    assert_eq!(error_kind(&bin(&["evaluate", "--config", cfg.to_str().unwrap()])), "config");
}

#[test]
fn bad_flags_exit_with_usage_error() {
    let out = bin(&["evaluate", "--variant", "best"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(bin(&["--help"]).status.success());
}
