use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn multlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multlab")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("multlab-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> String {
    let p = scratch(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_exit_codes() {
    let ok = write("ok.json", r#"{"f": {"kind": "fixture", "name": "alternating"}, "x": 10000, "lower_bound": 2.0}"#);
    let out = scratch("ok_report.json");
    let csv = scratch("ok.csv");
    let o = multlab(&["run", "gap", "--config", &ok, "--out", out.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["config"]["experiment"], "gap");
    assert_eq!(report["schema_version"], 1);
    let csv = fs::read_to_string(csv).unwrap();
    assert!(csv.starts_with("series,checkpoint,value\nrunning_min,"));

    let bad = write("bad.json", r#"{"f": {"kind": "fixture", "name": "liouville"}, "x": 10000, "lower_bound": 1.0}"#);
    assert_eq!(multlab(&["run", "gap", "--config", &bad]).status.code(), Some(1));

    let typo = write("typo.json", r#"{"f": {"kind": "fixture", "name": "liouville"}, "xx": 10000}"#);
    assert_eq!(multlab(&["run", "gap", "--config", &typo]).status.code(), Some(2));
    let wrong = write("wrong.json", r#"{"experiment": "ks", "f": {"kind": "fixture", "name": "liouville"}}"#);
    assert_eq!(multlab(&["run", "gap", "--config", &wrong]).status.code(), Some(2));
    assert_eq!(multlab(&["run", "gap", "--config", "/nonexistent/cfg.json"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    let cfg = write("det.json", r#"{"f": {"kind": "fixture", "name": "random_unimodular"}, "x": 50000}"#);
    let a = multlab(&["run", "ks", "--config", &cfg]);
    let b = multlab(&["run", "ks", "--config", &cfg]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pretend_writes_ranked_table() {
    let out = scratch("pretend.csv");
    let o = multlab(&["pretend", "--f", "chi5", "--x", "1e5", "--Q", "5", "--T", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let best: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(best["modulus"], 5);
    let table = fs::read_to_string(out).unwrap();
    assert!(table.lines().nth(1).unwrap().starts_with("1,5,"));
}

#[test]
fn correlate_natural_and_log() {
    let o = multlab(&["correlate", "--f", "chi5", "--forms", "1,0,1,1", "--x", "1e5", "--checkpoints", "final"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let v = r["values"][0][0].as_f64().unwrap() / 1e5;
    assert!((v + 0.2).abs() < 1e-3);
    let inline = r#"{"kind": "fixture", "name": "liouville"}"#;
    let o = multlab(&["correlate", "--f", inline, "--log", "--forms", "2,1,3,1", "--x", "1e4"]);
    assert_eq!(o.status.code(), Some(0));
    // general forms need logarithmic weights
    assert_eq!(multlab(&["correlate", "--f", "chi5", "--forms", "2,1,3,1", "--x", "1e4"]).status.code(), Some(2));
    assert_eq!(multlab(&["correlate", "--f", "no_such_fixture", "--x", "1e4"]).status.code(), Some(2));
}

#[test]
fn chudakov_and_density() {
    let o = multlab(&["chudakov", "--setup", "chi9", "--x", "1e5", "--dmax", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = multlab(&["density", "--mode", "rough-ap", "--params", r#"{"q": 3, "a": 1, "t": 1, "n_max": 7}"#, "--x", "1e4"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["member_count"].as_u64().unwrap() > 0);
    let o = multlab(&["density", "--mode", "structured", "--params", r#"{"g": {"kind": "fixture", "name": "chi9_cubic"}, "q": 9, "t": 1, "n_max": 7}"#, "--x", "1e4"]);
    assert_eq!(o.status.code(), Some(0));
    let o = multlab(&["density", "--mode", "thin", "--params", r#"{"set": {"listed": [2]}}"#, "--x", "1048576"]);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["sum_tau"].as_f64().unwrap() - 4.0).abs() < 1e-4);
    // hypothesis violation
    let o = multlab(&["density", "--mode", "rough-ap", "--params", r#"{"q": 3, "a": 0, "t": 1, "n_max": 7}"#, "--x", "1e4"]);
    assert_eq!(o.status.code(), Some(2));
}
