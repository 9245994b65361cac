use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn docalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_docalign"))
        .args(args)
        .output()
        .expect("spawn docalign")
}

fn ok_json(args: &[&str]) -> Value {
    let out = docalign(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("summary is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small synthetic corpus with shuffled copies and unrelated documents.
fn synth(dir: &Path) {
    let v = ok_json(&[
        "synth",
        "--out-dir",
        s(dir),
        "--pairs",
        "8",
        "--distractors",
        "4",
        "--shuffle",
        "--min-sentences",
        "8",
        "--max-sentences",
        "20",
        "--dim",
        "24",
        "--boilerplate-rate",
        "0.1",
        "--seed",
        "3",
    ]);
    assert_eq!(v["documents"], 28);
    assert_eq!(v["gold_pairs"], 8);
}

fn inputs(data: &Path) -> Vec<String> {
    ["corpus.jsonl", "embeddings.emb", "lid.jsonl", "gold.tsv"]
        .iter()
        .zip(["--corpus", "--embeddings", "--lid", "--gold"])
        .flat_map(|(f, flag)| [flag.to_string(), data.join(f).display().to_string()])
        .collect()
}

fn with<'a>(head: &[&'a str], rest: &'a [String]) -> Vec<&'a str> {
    head.iter()
        .copied()
        .chain(rest.iter().map(String::as_str))
        .collect()
}

#[test]
fn help_and_version_exit_zero() {
    assert!(docalign(&["--help"]).status.success());
    assert!(docalign(&["run", "--help"]).status.success());
    assert!(docalign(&["--version"]).status.success());
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(docalign(&[]).status.code(), Some(1));
    assert_eq!(docalign(&["run", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(
        docalign(&["run", "--scheme", "tfidf"]).status.code(),
        Some(1)
    );
}

#[test]
fn bad_inputs_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope.jsonl");
    let out = docalign(&["run", "--corpus", s(&missing), "--embeddings", s(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    let data = tmp.path().join("data");
    synth(&data);
    fs::write(data.join("embeddings.emb"), b"not an embedding file").unwrap();
    let args = inputs(&data);
    let out_dir = tmp.path().join("out");
    let out = docalign(&with(&["run", "--out-dir", s(&out_dir)], &args));
    assert_eq!(out.status.code(), Some(1));

    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "windows = many\n").unwrap();
    let out = docalign(&with(&["run", "--config", s(&cfg)], &args));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.cfg"));
}

#[test]
fn run_reports_summary_and_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let out = tmp.path().join("out");
    let args = inputs(&data);
    let v = ok_json(&with(&["run", "--out-dir", s(&out)], &args));
    assert_eq!(v["documents"], 28);
    assert_eq!(v["matches"], 8);
    assert_eq!(v["recall"]["recall"], 1.0);
    let stages: Vec<&str> = v["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|st| st["stage"].as_str().unwrap())
        .collect();
    assert!(stages.contains(&"candidates") && stages.contains(&"extract"));
    for name in [
        "docvecs.emb",
        "candidates.tsv",
        "scored.tsv",
        "matches.tsv",
        "sentence_pairs.tsv",
    ] {
        assert!(out.join(name).is_file(), "{name}");
    }
}

#[test]
fn stage_commands_reproduce_run() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let args = inputs(&data);
    let full = tmp.path().join("full");
    ok_json(&with(&["run", "--out-dir", s(&full)], &args));

    let step = tmp.path().join("step");
    for cmd in ["docvec", "candidates", "align-score", "match", "extract"] {
        ok_json(&with(&[cmd, "--out-dir", s(&step)], &args));
    }
    for name in [
        "docvecs.emb",
        "candidates.tsv",
        "scored.tsv",
        "matches.tsv",
        "sentence_pairs.tsv",
    ] {
        assert_eq!(
            fs::read(full.join(name)).unwrap(),
            fs::read(step.join(name)).unwrap(),
            "{name}"
        );
    }
    let v = ok_json(&with(&["eval-recall", "--out-dir", s(&step)], &args));
    assert_eq!(v["recall"], 1.0);
    assert_eq!(v["gold"], 8);
}

#[test]
fn candidate_recall_is_reported_per_k() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let args = inputs(&data);
    let out = tmp.path().join("out");
    ok_json(&with(&["docvec", "--out-dir", s(&out)], &args));
    let v = ok_json(&with(
        &["candidates", "--out-dir", s(&out), "--k", "6"],
        &args,
    ));
    let recall = v["recall_at_k"].as_object().unwrap();
    let keys: Vec<&str> = recall.keys().map(String::as_str).collect();
    for k in ["1", "2", "4", "6"] {
        assert!(keys.contains(&k), "{keys:?}");
    }
    assert_eq!(recall["6"], 1.0);
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let args = inputs(&data);
    let cfg = tmp.path().join("run.cfg");
    let from_file = tmp.path().join("from-file");
    fs::write(
        &cfg,
        format!(
            "# shared settings\nk = 1\nout_dir = {}\n",
            from_file.display()
        ),
    )
    .unwrap();

    let v = ok_json(&with(&["run", "--config", s(&cfg)], &args));
    assert_eq!(v["candidates"], 20);
    assert!(from_file.join("candidates.tsv").is_file());

    let flagged = tmp.path().join("flagged");
    let v = ok_json(&with(
        &[
            "run",
            "--config",
            s(&cfg),
            "--k",
            "3",
            "--out-dir",
            s(&flagged),
        ],
        &args,
    ));
    assert_eq!(v["candidates"], 60);
    assert!(flagged.join("candidates.tsv").is_file());
}

#[test]
fn pca_and_margin_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    synth(&data);
    let args = inputs(&data);
    let out = tmp.path().join("out");
    let v = ok_json(&with(
        &["pca", "--out-dir", s(&out), "--pca-dim", "8"],
        &args,
    ));
    assert_eq!(
        (v["input_dim"].as_u64(), v["output_dim"].as_u64()),
        (Some(24), Some(8))
    );
    assert!(out.join("pca.bin").is_file() && out.join("embeddings.pca.emb").is_file());

    let v = ok_json(&with(&["mine-margin", "--out-dir", s(&out)], &args));
    assert!(v["pairs"].as_u64().unwrap() > 0);
    let text = fs::read_to_string(out.join("margin.tsv")).unwrap();
    assert_eq!(text.lines().count() as u64, v["pairs"].as_u64().unwrap());
}
