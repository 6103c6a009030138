use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ybx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ybx")).args(args).env_remove("YBX_SEED").output().expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

fn checks(out: &Output) -> Vec<Value> {
    lines(out).into_iter().filter(|v| v["record"] == "check").collect()
}

#[test]
fn verify_example_passes_twenty_trials() {
    let w = fixture("slmn02.json");
    let out = ybx(&["verify", "--weights", w.to_str().unwrap(), "--trials", "20", "--seed", "7", "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = checks(&out);
    assert_eq!(recs.len(), 20);
    assert!(recs.iter().all(|r| r["pass"] == true && r["tol"] == 1e-9));
    let all = lines(&out);
    assert_eq!(all[0]["record"], "header");
    assert_eq!(all[0]["seed"], 7);
    let summary = all.last().unwrap();
    assert_eq!(summary["record"], "summary");
    assert_eq!(summary["passed"], 20);
}

#[test]
fn missing_file_exits_3() {
    let out = ybx(&["verify", "--weights", "/nonexistent/weights.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weights.json"));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_files_exit_3() {
    let short = fixture("short_table.json");
    let out = ybx(&["verify", "--weights", short.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extent mismatch"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": ").unwrap();
    assert_eq!(ybx(&["verify", "--weights", bad.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(ybx(&["net", "solve", "--input", bad.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ybx(&["verify", "--bogus"]).status.code(), Some(2));
    assert_eq!(ybx(&["frobnicate"]).status.code(), Some(2));
    let w = fixture("slmn02.json");
    assert_eq!(ybx(&["verify", "--weights", w.to_str().unwrap(), "--trials", "0"]).status.code(), Some(2));
    assert_eq!(ybx(&["verify", "--weights", w.to_str().unwrap(), "--tol", "-1"]).status.code(), Some(2));
    assert_eq!(ybx(&["catalog", "emit", "no-such-entry"]).status.code(), Some(2));
    let wye = fixture("wye.json");
    assert_eq!(ybx(&["net", "equiv", "--input", wye.to_str().unwrap(), "--between", "t1"]).status.code(), Some(2));
}

#[test]
fn failing_check_exits_1() {
    // a table is rapidity independent, and this constant six-vertex weight
    // does not satisfy the constant relation
    let t = fixture("six_vertex_table.json");
    let out = ybx(&["verify", "--weights", t.to_str().unwrap(), "--trials", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let recs = checks(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["pass"], false);
    assert_eq!(lines(&out).last().unwrap()["pass"], false);
}

#[test]
fn reports_do_not_depend_on_workers() {
    let w = fixture("slmn02.json");
    let w = w.to_str().unwrap();
    let a = ybx(&["verify", "--weights", w, "--trials", "30", "--seed", "3", "--jobs", "1"]);
    let b = ybx(&["verify", "--weights", w, "--trials", "30", "--seed", "3", "--jobs", "6"]);
    assert_eq!(a.stdout, b.stdout);
    let c = ybx(&["verify", "--weights", w, "--trials", "30", "--seed", "4", "--jobs", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn seed_from_environment() {
    let w = fixture("slmn02.json");
    let w = w.to_str().unwrap();
    let flag = ybx(&["verify", "--weights", w, "--trials", "3", "--seed", "99"]);
    let env = Command::new(env!("CARGO_BIN_EXE_ybx"))
        .args(["verify", "--weights", w, "--trials", "3"])
        .env("YBX_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn wye_reduces_to_triangle_netlist() {
    let wye = fixture("wye.json");
    let out = ybx(&["net", "reduce", "--input", wye.to_str().unwrap(), "--terminals", "t1,t2,t3"]);
    assert_eq!(out.status.code(), Some(0));
    let all = lines(&out);
    let net = &all.iter().find(|v| v["name"] == "netlist").unwrap()["netlist"];
    let edges = net["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 3);
    let side = |a: &str, b: &str| {
        edges
            .iter()
            .find(|e| (e["a"] == a && e["b"] == b) || (e["a"] == b && e["b"] == a))
            .map(|e| e["z"][0].as_f64().unwrap())
            .unwrap()
    };
    // side opposite leg i is (Z1Z2 + Z2Z3 + Z3Z1) / Zi = 11 / Zi
    assert!((side("t2", "t3") - 11.0).abs() < 1e-13);
    assert!((side("t1", "t3") - 5.5).abs() < 1e-13);
    assert!((side("t1", "t2") - 11.0 / 3.0).abs() < 1e-13);
}

#[test]
fn output_flag_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.jsonl");
    let div = fixture("divider.json");
    let out = ybx(&["net", "solve", "--input", div.to_str().unwrap(), "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let v: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let sol = v.iter().find(|r| r["name"] == "kirchhoff").unwrap();
    // divider: m = (1+i) / (2+i) = (3+i)/5
    assert!((sol["potentials"]["m"][0].as_f64().unwrap() - 0.6).abs() < 1e-15);
    assert!((sol["potentials"]["m"][1].as_f64().unwrap() - 0.2).abs() < 1e-15);
}

#[test]
fn convert_embedding_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p2 = dir.path().join("potts2.json");
    let cb = dir.path().join("cb.json");
    assert_eq!(ybx(&["catalog", "emit", "potts2", "--out", p2.to_str().unwrap()]).status.code(), Some(0));
    let args = |src: &Path, to: &str| {
        vec![
            "convert".to_string(),
            "--weights".into(),
            src.to_str().unwrap().into(),
            "--to".into(),
            to.into(),
            "--p".into(),
            "0.9".into(),
            "--q".into(),
            "0.25".into(),
        ]
    };
    let mut a = args(&p2, "checkerboard-irf");
    a.extend(["--out".into(), cb.to_str().unwrap().into()]);
    let a: Vec<&str> = a.iter().map(String::as_str).collect();
    assert_eq!(ybx(&a).status.code(), Some(0));
    let back = args(&cb, "spin");
    let back: Vec<&str> = back.iter().map(String::as_str).collect();
    let direct = args(&p2, "spin");
    let direct: Vec<&str> = direct.iter().map(String::as_str).collect();
    let x = ybx(&back);
    let y = ybx(&direct);
    assert_eq!(x.status.code(), Some(0));
    assert_eq!(x.stdout, y.stdout);
}

#[test]
fn every_catalog_entry_verifies() {
    let out = ybx(&["catalog", "list"]);
    let dir = tempfile::tempdir().unwrap();
    for entry in lines(&out).iter().filter(|v| v["name"] == "catalog-entry") {
        let name = entry["entry"].as_str().unwrap();
        let path = dir.path().join(format!("{name}.json"));
        assert_eq!(ybx(&["catalog", "emit", name, "--out", path.to_str().unwrap()]).status.code(), Some(0));
        let v = ybx(&["verify", "--weights", path.to_str().unwrap(), "--trials", "5", "--seed", "1"]);
        assert_eq!(v.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&v.stdout));
    }
}
