use std::path::Path;
use std::process::{Command, Output};

fn treemax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treemax"))
        .args(args)
        .env_remove("TREEMAX_VERTEX_CAP")
        .output()
        .expect("spawn treemax")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn eval_delta_at_origin() {
    let o = treemax(&["eval", "--tree", "Tb:2", "--window", "-4..4", "--op", "U", "--f", "delta:0", "--region", "H0:r4"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("addr,value_num,value_den,witness_vertex,witness_height,certified"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][..3], ["0", "1", "1"]);
    // two steps down from x_2 lands on the horocycle at distance 4 from o
    let far = rows.iter().find(|r| r[0] == "2/1.0").expect("row for 2/1.0");
    assert_eq!(far[1..3], ["1", "7"]);
    assert!(rows.iter().all(|r| r[5] == "true"));
}

#[test]
fn eval_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = treemax(&["eval", "--window", "-2..2", "--op", "T", "--f", "delta:0", "--region", "0,1/1", "--out", out]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn bad_tree_is_usage_error() {
    let o = treemax(&["eval", "--tree", "bogus", "--f", "delta:0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn vertex_cap_exit_code() {
    let o = Command::new(env!("CARGO_BIN_EXE_treemax"))
        .args(["eval", "--window", "-8..8", "--f", "delta:0"])
        .env("TREEMAX_VERTEX_CAP", "50")
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}

#[test]
fn decompose_delta() {
    let o = treemax(&["decompose", "--window", "-6..6", "--f", "delta:0", "--alpha", "1/10"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["triangles"].as_array().unwrap().len(), 3);
    assert_eq!(v["level_set_size"], 15);
}

#[test]
fn decompose_auto_window_matches_explicit() {
    let a = treemax(&["decompose", "--f", "delta:0", "--alpha", "1/10"]);
    let b = treemax(&["decompose", "--window", "-6..6", "--f", "delta:0", "--alpha", "1/10"]);
    assert_eq!(code(&a), 0);
    let va: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let vb: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(va["triangles"], vb["triangles"]);
}

#[test]
fn decompose_alpha_above_sup_is_empty() {
    let o = treemax(&["decompose", "--f", "delta:0", "--alpha", "2"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["triangles"].as_array().unwrap().is_empty());
}

#[test]
fn decompose_small_window_reports_radius() {
    let o = treemax(&["decompose", "--window", "-1..1", "--f", "delta:0", "--alpha", "1/100"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("-5..5"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"alpha": "2"}"#).unwrap();
    let o = treemax(&["decompose", "--f", "delta:0", "--alpha", "1/10", "--config", cfg.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["alpha"], "2/1");
}

#[test]
fn verify_triangle_bounds() {
    let o = treemax(&["verify", "lemma21", "--tree", "Tb:2", "--window", "-4..4"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "pass");
}

fn read_csv_value(dir: &Path, name: &str, param: &str) -> Option<String> {
    let csv = std::fs::read_to_string(dir.join("observations.csv")).unwrap();
    csv.lines()
        .find(|l| l.contains(&format!(",{name},")) && l.contains(param))
        .map(|l| l.rsplit(',').nth(2).unwrap().to_string())
}

#[test]
fn verify_level_set_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = treemax(&["verify", "thm43", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("report.json").is_file());
    assert_eq!(read_csv_value(dir.path(), "level_set_size", "alpha=1/10\"").as_deref(), Some("15"));
}

#[test]
fn verify_unknown_scenario() {
    assert_eq!(code(&treemax(&["verify", "nosuch"])), 2);
}

#[test]
fn verify_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = treemax(&["verify", "thm32", "--seed", "7", "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    for f in ["report.json", "observations.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}
