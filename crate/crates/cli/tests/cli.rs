use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy-lab"))
        .args(args)
        .env_remove("HARDY_LAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn two_chain_report() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("two.json");
    let out = run(&["tree", "--chain", "2", "--out", file.to_str().unwrap()]);
    assert!(out.status.success());
    let out = run(&["hardy", "--input", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["result"];
    assert!((r["a_chain"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
    assert!((r["c_exact"].as_f64().unwrap() - 1.618034).abs() < 1e-6);
    assert!((r["b_ehp"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-6);
}

#[test]
fn single_vertex_constants_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "one.json",
        r#"{"tree": {"root": 0, "parents": [[1, 0]]}, "u": [2.0], "v": [3.0], "p": 2.0}"#,
    );
    let out = run(&["hardy", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    for key in ["a_chain", "a_tree", "b_ehp", "c_exact"] {
        assert!((r[key].as_f64().unwrap() - 1.5).abs() < 1e-9, "{key}: {}", r[key]);
    }
}

#[test]
fn covering_matches_golden_file() {
    let out = run(&["covering", "--alpha", "0.5", "--depth", "3", "--phi", "demo"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/demo_depth3.json");
    let frozen: Value = serde_json::from_str(&std::fs::read_to_string(golden).unwrap()).unwrap();
    let r = json(&out);
    assert_eq!(r["result"]["covering"], frozen);
    assert_eq!(r["result"]["geometry"]["disjoint"], Value::Bool(true));
}

#[test]
fn reports_embed_config_and_version() {
    let out = run(&["covering", "--depth", "2", "--seed", "9"]);
    let r = json(&out);
    assert_eq!(r["version"], Value::String(env!("CARGO_PKG_VERSION").into()));
    assert_eq!(r["config"]["common"]["seed"], 9);
    assert_eq!(r["config"]["command"]["name"], "covering");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &str| {
        vec![
            "ineq".to_owned(),
            "--depth".into(),
            "4".into(),
            "--samples".into(),
            "4000".into(),
            "--seed".into(),
            "3".into(),
            "--out".into(),
            dir.path().join(name).to_str().unwrap().to_owned(),
        ]
    };
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let a = args("a.json");
        let out = run(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        bytes.push(std::fs::read(dir.path().join("a.json")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    let a = bytes.swap_remove(0);
    // the worker count changes the config but not the result
    let mut w = args("c.json");
    w.extend(["--workers".into(), "1".into()]);
    run(&w.iter().map(String::as_str).collect::<Vec<_>>());
    let c: Value = serde_json::from_slice(&std::fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    let a: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(a["result"], c["result"]);
}

#[test]
fn decompose_and_sweep_csv() {
    let out = run(&["decompose", "--depth", "4", "--samples", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.ends_with(",true")).count(), 3);
    let out = run(&["ineq", "--domain", "unit", "--samples", "2000", "--sweep=-0.2,0.3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["hardy"]).status.code(), Some(2));
    assert_eq!(run(&["hardy", "--input", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(run(&["covering", "--phi", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["covering", "--depth", "10", "--cap", "50"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let star = dir.path().join("star.json");
    run(&["tree", "--star", "12", "--out", star.to_str().unwrap()]);
    assert_eq!(run(&["hardy", "--input", star.to_str().unwrap(), "--cap", "5"]).status.code(), Some(3));
}
