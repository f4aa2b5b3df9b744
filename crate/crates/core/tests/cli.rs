use std::process::Command;

use plateau::cli::run_with;

fn plateau(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_plateau")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn in_process(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("plateau").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

const SWEEP: &[&str] = &[
    "variance-sweep",
    "--structure",
    "proposed",
    "--qubits",
    "2..4",
    "--layers",
    "6",
    "--samples",
    "12",
    "--pending",
    "2",
    "--seed",
    "11",
];

#[test]
fn variance_sweep_is_byte_identical_across_runs_and_threads() {
    let (code, first, _) = plateau(SWEEP);
    assert_eq!(code, 0);
    let (_, second, _) = plateau(SWEEP);
    assert_eq!(first, second);
    let mut single = SWEEP.to_vec();
    single.extend(["--threads", "1"]);
    let (_, one_thread, _) = plateau(&single);
    assert_eq!(first, one_thread);

    let mut lines = first.lines();
    assert_eq!(lines.next(), Some("structure,n,L,samples,variance,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("proposed,2,6,12,"));
}

#[test]
fn different_seeds_differ() {
    let (_, a) = in_process(SWEEP);
    let mut other = SWEEP.to_vec();
    *other.last_mut().unwrap() = "12";
    let (_, b) = in_process(&other);
    assert_ne!(a, b);
}

#[test]
fn json_sweep_parses() {
    let mut args = SWEEP.to_vec();
    args.extend(["--format", "json"]);
    let (code, text) = in_process(&args);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1]["n"], 3);
    assert_eq!(rows[1]["L"], 6);
    assert!(rows[1]["variance"].as_f64().unwrap() > 0.0);
}

#[test]
fn layer_sweep_runs() {
    let (code, text) = in_process(&[
        "layer-sweep", "--structure", "design2", "--qubits", "3", "--layers", "2..4", "--samples", "8",
    ]);
    assert_eq!(code, 0);
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn grad_hist_has_one_row_per_sample() {
    let (code, text) = in_process(&[
        "grad-hist", "--structure", "lcu", "--qubits", "3", "--layers", "5", "--samples", "9",
    ]);
    assert_eq!(code, 0);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("structure,n,L,sample_index,gradient"));
    assert_eq!(lines.count(), 9);
}

#[test]
fn design_bound_prints_integer() {
    let (code, text, _) = plateau(&["design-bound", "--dim", "2", "--t", "2"]);
    assert_eq!(code, 0);
    assert_eq!(text, "10\n");
}

#[test]
fn haar_verify_emits_checks() {
    let (code, text) = in_process(&["haar-verify", "--dim", "2", "--samples", "400", "--format", "json"]);
    assert_eq!(code, 0);
    for line in text.lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(row["check"].is_string());
        assert!(row["estimate"].is_number());
    }
    let (code, text) = in_process(&["haar-verify", "--dim", "4", "--samples", "400", "--suite", "variance-formulas"]);
    assert_eq!(code, 0);
    assert!(text.starts_with("check,estimate,closed_form,samples,standard_error,sigmas"));
}

#[test]
fn train_epoch_count_and_final_freeze() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("train.csv");
    let out_s = out.to_str().unwrap();
    let (code, _) = in_process(&[
        "train", "--qubits", "3", "--layers", "6", "--target", "-0.05", "--pending", "2",
        "--epochs-per-stage", "4", "--seed", "5", "--out", out_s,
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    // header + epoch 0 + 3 stages * 4 epochs
    assert_eq!(csv.lines().count(), 1 + 1 + 12);
    assert!(csv.starts_with("run,structure,target,epoch,stage,expectation,cost"));

    let manifest_path = dir.path().join("train.csv.manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "train");
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["summary"]["epochs"], 12);
    assert_eq!(manifest["summary"]["final_fixed_layers"], 6);
    assert!(manifest["duration_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn no_manifest_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_plateau"))
        .current_dir(dir.path())
        .args(["design-bound", "--dim", "2", "--t", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn usage_and_config_errors() {
    let (code, _, err) = plateau(&["variance-sweep", "--structure", "design2"]);
    assert_eq!(code, 2);
    assert!(err.contains("Usage"));
    let (code, _, _) = plateau(&["train", "--qubits", "3", "--layers", "5", "--target", "0.1", "--pending", "2"]);
    assert_eq!(code, 2);
    let (code, _, _) = plateau(&["train", "--qubits", "3", "--layers", "4", "--target", "1.5"]);
    assert_eq!(code, 2);
    let (code, _, _) = plateau(&["design-bound", "--dim", "0", "--t", "1"]);
    assert_eq!(code, 2);
    let (code, _, _) = plateau(&["variance-sweep", "--structure", "design2", "--qubits", "2", "--layers", "3", "--threads", "0"]);
    assert_eq!(code, 2);
}
