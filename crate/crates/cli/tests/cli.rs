use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    lines: Vec<Value>,
    stderr: String,
}

fn nitk(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_nitk")).args(args).env_remove("NITK_THREADS").output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    Run {
        code: out.status.code().unwrap(),
        lines: stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn file(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const BSC_NET: &str = r#"{"input_alphabets":[2,0],"output_alphabets":[0,2],
  "kernel":[[0.9,0.1],[0.1,0.9]],"demands":[[1],[]]}"#;

#[test]
fn capacity_record() {
    let dir = TempDir::new().unwrap();
    let ch = file(&dir, "bsc.json", r#"{"kernel":[[0.89,0.11],[0.11,0.89]]}"#);
    let r = nitk(&["capacity", "--channel", s(&ch)]);
    assert_eq!(r.code, 0);
    assert_eq!(r.lines.len(), 1);
    let rec = &r.lines[0];
    assert_eq!(rec["command"], "capacity");
    assert!((rec["outputs"]["capacity"].as_f64().unwrap() - 0.500084041835472).abs() < 1e-6);
    assert_eq!(rec["inputs"]["channel"].as_str().unwrap().len(), 64);
    assert!(rec["seed"].is_null());
}

#[test]
fn dueck_on_noisy_channel_writes_csv() {
    let dir = TempDir::new().unwrap();
    let ch = file(&dir, "noisy.json", r#"{"kernel":[[0.5,0.5],[0.5,0.5]]}"#);
    let csv = dir.path().join("alpha.csv");
    let r = nitk(&["dueck", "--channel", s(&ch), "--rate", "0.5,1.0", "--csv", s(&csv)]);
    assert_eq!(r.code, 0);
    let out = r.lines[0]["outputs"].as_array().unwrap();
    assert!((out[0]["alpha"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((out[1]["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let text = std::fs::read_to_string(csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "rate,alpha,kl_part,rate_part,mutual_information");
    assert_eq!(rows.len(), 3);
}

#[test]
fn missing_file_is_a_domain_error() {
    let r = nitk(&["capacity", "--channel", "/nonexistent/ch.json"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.lines[0]["command"], "capacity");
    assert!(r.lines[0]["error"].as_str().unwrap().contains("/nonexistent/ch.json"));
}

#[test]
fn malformed_json_reports_position() {
    let dir = TempDir::new().unwrap();
    let ch = file(&dir, "bad.json", "{\"kernel\":\n  [[0.5, 0.5],,]}");
    let r = nitk(&["capacity", "--channel", s(&ch)]);
    assert_eq!(r.code, 1);
    assert!(r.lines[0]["error"].as_str().unwrap().contains("line 2"));
}

#[test]
fn invalid_kernel_names_the_field() {
    let dir = TempDir::new().unwrap();
    let ch = file(&dir, "bad.json", r#"{"kernel":[[0.5,0.6]]}"#);
    let r = nitk(&["capacity", "--channel", s(&ch)]);
    assert_eq!(r.code, 1);
    assert!(r.lines[0]["error"].as_str().unwrap().contains("kernel"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(nitk(&["frobnicate"]).code, 2);
    assert_eq!(nitk(&["mds", "--eps", "0.1"]).code, 2);
}

#[test]
fn stochastic_commands_need_a_seed() {
    let r = nitk(&["mds", "--eps", "0.1", "--N", "3", "--trials", "100"]);
    assert_eq!(r.code, 1);
    assert!(r.lines[0]["error"].as_str().unwrap().contains("--seed"));
}

fn strip_time(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_s");
    v
}

#[test]
fn seeded_output_is_independent_of_threads() {
    let base = ["mds", "--eps", "0.2", "--N", "4", "--trials", "20000", "--seed", "9"];
    let one = nitk(&[&base[..], &["--threads", "1"]].concat());
    let four = nitk(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.code, 0);
    assert_eq!(strip_time(one.lines[0].clone()), strip_time(four.lines[0].clone()));
    assert_eq!(one.lines[0]["seed"], 9);
}

#[test]
fn search_then_evaluate_round_trip() {
    let dir = TempDir::new().unwrap();
    let net = file(&dir, "net.json", BSC_NET);
    let code = dir.path().join("code.json");
    let r = nitk(&["search-code", "--network", s(&net), "--n", "3", "--messages", "2,1", "--out", s(&code)]);
    assert_eq!(r.code, 0);
    let best = r.lines[0]["outputs"]["error_prob"].as_f64().unwrap();
    // repetition over three uses of BSC(0.1)
    assert!((best - 0.028).abs() < 1e-12);
    let e = nitk(&["eval-code", "--network", s(&net), "--code", s(&code)]);
    assert_eq!(e.code, 0);
    assert_eq!(e.lines[0]["outputs"]["report"]["error_prob"].as_f64().unwrap(), best);
}

#[test]
fn blowup_from_files() {
    let dir = TempDir::new().unwrap();
    let src = file(&dir, "src.json", r#"{"n":3,"initial":[0.6,0.4],"transition":[[0.8,0.2],[0.3,0.7]]}"#);
    let set = file(&dir, "set.json", r#"{"members":[[1,1,1],[0,1,1]]}"#);
    let r = nitk(&["blowup", "--source", s(&src), "--set", s(&set), "--ell", "1"]);
    assert_eq!(r.code, 0, "{:?}", r.lines);
    let out = &r.lines[0]["outputs"];
    assert!(out.to_string().contains("\"holds\":true"));
    assert_eq!(r.lines[0]["inputs"].as_object().unwrap().len(), 2);
}

#[test]
fn suite_runs_and_rejects_unknown_ids() {
    let r = nitk(&["suite", "schedule"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.lines.len(), 2);
    assert_eq!(r.lines[0]["check"]["passed"], true);
    assert!(r.stderr.starts_with("PASS [14]"));
    let bad = nitk(&["suite", "everything"]);
    assert_eq!(bad.code, 1);
    assert!(bad.lines[0]["error"].as_str().unwrap().contains("everything"));
}
