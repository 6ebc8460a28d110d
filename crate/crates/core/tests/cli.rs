mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::dataset_path;

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synthprune"))
        .args(args)
        .current_dir(cwd)
        .env("SYNTHPRUNE_WORKERS", "2")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn train_sweep_report_similarity_dag_prune() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = dataset_path();
    let data = data.to_str().unwrap();
    fs::write(
        d.join("cfg.toml"),
        format!("dataset = \"{data}\"\nepochs = 4\nseeds = \"0..2\"\nthresholds = [0.9]\n"),
    )
    .unwrap();

    let out = ok(&run(
        &["train", "--config", "cfg.toml", "--strategy", "random_synth_prune", "--sparsity_threshold", "0.85", "--output_dir", "one", "--seed", "1"],
        d,
    ));
    assert!(out.contains("random_synth_prune__S0.85__seed001"));
    let run_json = d.join("one/runs/random_synth_prune__S0.85__seed001.json");
    assert!(run_json.exists());
    assert!(d.join("one/runs/random_synth_prune__S0.85__seed001.events.csv").exists());

    let out = ok(&run(&["sweep", "--config", "cfg.toml", "--output_dir", "grid", "--strategies", "dense,subnet_only,strategic_synth"], d));
    assert!(out.starts_with("6 runs (0 failed) on 2 workers"), "{out}");
    ok(&run(&["report", "--results", "grid", "--threshold", "0.9"], d));
    assert!(d.join("grid/report/means_S0.9.csv").exists());
    let out = ok(&run(&["similarity", "--results", "grid"], d));
    assert!(out.contains("max off-diagonal jaccard similarity"));
    let csv = fs::read_to_string(d.join("grid/report/similarity.csv")).unwrap();
    assert!(csv.starts_with("jaccard,"));

    let net = d.join("grid/runs/subnet_only__seed000.json");
    ok(&run(&["dag-prune", net.to_str().unwrap(), "--out", "pruned.txt"], d));
    assert!(fs::read_to_string(d.join("pruned.txt")).unwrap().starts_with("synthprune-network 1"));
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["report", "--results", "nowhere"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
    let out = run(&["train", "--strategy", "bogus"], dir.path());
    assert!(!out.status.success());
    let out = run(&["train", "--dataset", "missing.csv", "--epochs", "1"], dir.path());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
}
