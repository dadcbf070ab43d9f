use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn gridcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridcut"))
        .args(args)
        .env_remove("GRIDCUT_THREADS")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn parse_case9() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("case9.json");
    let o = gridcut(&["parse", "--case", s(&fixture("case9.m")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = json(&out);
    assert_eq!(g["schema_version"], 1);
    assert_eq!(g["n"], 9);
    assert_eq!(g["edges"].as_array().unwrap().len(), 9);
    let manifest = json(&dir.path().join("case9.manifest.json"));
    assert_eq!(manifest["command"], "parse");
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 1);
    assert!(dir.path().join("case9.bus_index.json").exists());
}

#[test]
fn oracle_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"n": 2, "edges": [[0, 1, 0.75]]}"#).unwrap();
    let out = dir.path().join("o.json");
    let o = gridcut(&["oracle", "--graph", s(&g), "--out", s(&out)]);
    assert!(o.status.success());
    let r = json(&out);
    assert_eq!(r["max_cut_value"], 0.75);
    let mut opt: Vec<&str> = r["optimal_assignments"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    opt.sort();
    assert_eq!(opt, ["01", "10"]);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    assert_eq!(gridcut(&["bogus"]).status.code(), Some(2));
    assert_eq!(gridcut(&["oracle", "--out", s(&out), "--nope"]).status.code(), Some(2));
    assert_eq!(gridcut(&["oracle", "--out", s(&out)]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(gridcut(&["oracle", "--config", s(&missing), "--out", s(&out)]).status.code(), Some(2));
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"registres": 3}"#).unwrap();
    assert_eq!(gridcut(&["embed", "--config", s(&cfg), "--out", s(&out)]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    let g = dir.path().join("g.json");
    std::fs::write(&g, r#"{"n": 2, "edges": [[0, 0, 1.0]]}"#).unwrap();
    let o = gridcut(&["oracle", "--graph", s(&g), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let o = gridcut(&["oracle", "--graph", s(&dir.path().join("absent.json")), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_flags_merge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, format!(r#"{{"case": {:?}, "registers": 2, "seed": 5}}"#, s(&fixture("case9.m")))).unwrap();
    let out = dir.path().join("e.json");
    let o = gridcut(&["embed", "--config", s(&cfg), "--seed", "9", "--t-max", "1", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&dir.path().join("e.manifest.json"));
    assert_eq!(m["config"]["registers"], 2);
    assert_eq!(m["config"]["seed"], 9);
    assert_eq!(m["config"]["iterations"], 300);
}

#[test]
fn manifest_replay_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a/o.json");
    let o = gridcut(&["oracle", "--case", s(&fixture("case14.m")), "--out", s(&first)]);
    assert!(o.status.success());
    let second = dir.path().join("b/o.json");
    let manifest = dir.path().join("a/o.manifest.json");
    let o = gridcut(&["oracle", "--config", s(&manifest), "--out", s(&second)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn threads_flag_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let o = gridcut(&["--threads", "2", "parse", "--case", s(&fixture("case9.m")), "--out", s(&out)]);
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_gridcut"))
        .args(["parse", "--case", s(&fixture("case9.m")), "--out", s(&out)])
        .env("GRIDCUT_THREADS", "lots")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
