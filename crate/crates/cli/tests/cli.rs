use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wikicat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wikicat")).args(args).output().unwrap()
}

fn synth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wikicat-synth")).args(args).output().unwrap()
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthwiki")
}

fn wiki(dir: &Path) -> String {
    let out = synth(&["wiki", dir.to_str().unwrap(), "--n-per-class", "60"]);
    assert!(out.status.success());
    dir.join("config.json").to_str().unwrap().to_string()
}

#[test]
fn bundled_fixture_matches_generator() {
    let tmp = tempfile::tempdir().unwrap();
    let out = synth(&["wiki", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let mut names: Vec<_> = fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| e.file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for name in names {
        assert_eq!(
            fs::read(fixture_dir().join(&name)).unwrap(),
            fs::read(tmp.path().join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn missing_config_is_an_input_error() {
    assert_eq!(wikicat(&["map"]).status.code(), Some(2));
    assert_eq!(wikicat(&["map", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(wikicat(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(wikicat(&["label", "--mode", "sideways"]).status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let config = wiki(tmp.path());
    assert_eq!(wikicat(&["map", "--config", &config, "--workers", "0"]).status.code(), Some(2));
    assert_eq!(wikicat(&["--help"]).status.code(), Some(0));
}

#[test]
fn out_of_order_step_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let config = wiki(tmp.path());
    let out = wikicat(&["train", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn steps_run_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let config = wiki(tmp.path());
    for step in ["build-graph", "map", "label", "sample", "train", "evaluate"] {
        let out = wikicat(&[step, "--config", &config, "--workers", "2"]);
        assert!(out.status.success(), "{step}: {}", String::from_utf8_lossy(&out.stderr));
        let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(summary.is_object(), "{step}");
    }
    let input = tmp.path().join("docs.jsonl");
    fs::write(&input, "{\"text\": \"hello world\"}\n{\"text\": \"\"}\n").unwrap();
    let out = wikicat(&["predict", "--config", &config, "--input", input.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let preds = fs::read_to_string(tmp.path().join("out/predictions.jsonl")).unwrap();
    assert_eq!(preds.lines().count(), 2);

    let out = wikicat(&["label", "--config", &config, "--mode", "min_dist"]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["config"]["labeling"]["mode"], "min_dist");
}

#[test]
fn ablate_reports_every_mode() {
    let tmp = tempfile::tempdir().unwrap();
    let config = wiki(tmp.path());
    assert!(wikicat(&["map", "--config", &config]).status.success());
    let out = wikicat(&["ablate", "--config", &config]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let modes: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["mode"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(modes, ["full", "child_only", "all_descendants", "min_dist", "no_pruning"]);
    assert!(tmp.path().join("out/ablation.json").exists());
}
