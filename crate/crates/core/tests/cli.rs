use std::path::Path;
use std::process::{Command, Output};

use outletcheck::fixtures::{write_golden, GOLDEN_CLAIM, GOLDEN_FACTUALITY};
use serde_json::Value;

fn cli(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_outletcheck"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn golden() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_golden(dir.path()).unwrap();
    dir
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn profile_after_profile_all() {
    let dir = golden();
    let before = cli(dir.path(), &["profile", "reliable1.example"]);
    assert_eq!(before.status.code(), Some(2));
    json(&cli(dir.path(), &["profile-all"]));
    let profile = json(&cli(dir.path(), &["profile", "https://www.reliable1.example/a"]));
    assert_eq!(profile["domain"], "reliable1.example");
    assert!((profile["reliability"].as_f64().unwrap() - 0.9).abs() < 1e-12);
}

#[test]
fn planted_claim_matches_fixture_numbers() {
    let dir = golden();
    json(&cli(dir.path(), &["profile-all"]));
    let verdict = json(&cli(dir.path(), &["score-claim", GOLDEN_CLAIM]));
    assert!((verdict["factuality"].as_f64().unwrap() - GOLDEN_FACTUALITY).abs() < 1e-9);
    assert!((verdict["raw_score"].as_f64().unwrap() - 2.6).abs() < 1e-12);
    assert_eq!(verdict["band"], "likely-true");
    assert_eq!(verdict["evidence"].as_array().unwrap().len(), 4);
}

#[test]
fn usage_errors_exit_one() {
    let dir = golden();
    assert_eq!(cli(dir.path(), &["score-claim", ""]).status.code(), Some(1));
    assert_eq!(cli(dir.path(), &["score-claim", " !? "]).status.code(), Some(1));
    assert_eq!(cli(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(cli(dir.path(), &[]).status.code(), Some(1));
    assert_eq!(cli(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let dir = golden();
    assert_eq!(cli(dir.path(), &["score-article", "missing-id"]).status.code(), Some(2));
    assert_eq!(
        cli(dir.path(), &["--config", "absent.toml", "ingest"]).status.code(),
        Some(2)
    );
    std::fs::write(dir.path().join("articles.jsonl"), "{\"id\": \"x\"}\n").unwrap();
    let out = cli(dir.path(), &["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn train_then_profile_with_trained_model() {
    let dir = golden();
    let report = json(&cli(dir.path(), &["train"]));
    assert_eq!(report["rows"], 5);
    assert!(dir.path().join("model.json").exists());
    let cfg = std::fs::read_to_string(dir.path().join("config.toml")).unwrap();
    std::fs::write(
        dir.path().join("config.toml"),
        cfg.replace("mode = \"heuristic\"", "mode = \"trained\""),
    )
    .unwrap();
    json(&cli(dir.path(), &["profile-all"]));
    let profile = json(&cli(dir.path(), &["profile", "unreliable.example"]));
    assert_eq!(profile["model_mode"], "trained");
    let good = json(&cli(dir.path(), &["profile", "reliable2.example"]));
    assert!(good["reliability"].as_f64() > profile["reliability"].as_f64());
}

#[test]
fn record_and_report() {
    let dir = golden();
    json(&cli(dir.path(), &["profile-all"]));
    json(&cli(dir.path(), &["score-claim", "--record", GOLDEN_CLAIM]));
    let report = json(&cli(dir.path(), &["report"]));
    assert_eq!(report["recorded_verdicts"], 1);
    assert_eq!(report["profile_count"], 6);
    assert_eq!(report["profiles"][0]["domain"], "unreliable.example");
}

#[test]
fn out_flag_writes_file() {
    let dir = golden();
    let out = cli(dir.path(), &["ingest", "--out", "ingest.json"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("ingest.json")).unwrap();
    assert!(text.ends_with("}\n"));
}

#[test]
fn make_fixtures_writes_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = json(&cli(dir.path(), &["make-fixtures", "golden"]));
    assert_eq!(manifest["claim"], GOLDEN_CLAIM);
    for f in ["articles.jsonl", "outlets.jsonl", "config.toml"] {
        assert!(dir.path().join("golden").join(f).exists());
    }
}
