use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superspecial"))
        .args(args)
        .env("CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[test]
fn classes_for_p5() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["classes", "--p", "5", "--g", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["h"], "2");
    assert_eq!(strings(&v["e"]), ["72", "240"]);
    assert_eq!(v["mass"], "13/720");
    assert!(dir.path().join("classes-p5-g2.json").exists());

    let out = run(dir.path(), &["classes", "--p", "5", "--g", "1"]);
    assert_eq!(json(&out)["h"], "1");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["classes", "--p", "4", "--g", "1"][..],
        &["classes", "--p", "5", "--g", "0"],
        &["brandt", "--p", "5", "--g", "2", "--n", "5"],
        &["brandt", "--p", "5", "--g", "2", "--n", "4"],
        &["graph", "--p", "5", "--g", "1", "--ell", "2", "--kind", "big", "--format", "csv"],
        &["spectrum", "--p", "5", "--g", "1", "--ell", "2", "--kind", "sideways"],
        &["frobnicate"],
    ] {
        assert_eq!(run(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    for (p, g, ell) in [("5", "2", "2"), ("7", "1", "3")] {
        let out = run(dir.path(), &["verify", "--p", p, "--g", g, "--ell", ell]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(json(&out)["pass"], true);
    }
}

#[test]
fn corrupted_cache_is_named() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["classes", "--p", "5", "--g", "2"]).status.code(), Some(0));
    let path = dir.path().join("classes-p5-g2.json");
    let text = std::fs::read_to_string(&path).unwrap().replacen("\"e\": 240", "\"e\": 244", 1);
    std::fs::write(&path, text).unwrap();

    let out = run(dir.path(), &["verify", "--p", "5", "--g", "2", "--ell", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cache-integrity"));
    let v = json(&out);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["cache-integrity"]);

    let out = run(dir.path(), &["brandt", "--p", "5", "--g", "2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cache-integrity"));
}

#[test]
fn brandt_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for method in ["hermitian", "neighbors", "ideals"] {
        let out = run(dir.path(), &["brandt", "--p", "11", "--g", "1", "--n", "3", "--method", method]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(out.stdout);
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let csv = run(dir.path(), &["brandt", "--p", "5", "--g", "2", "--n", "2", "--format", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap(), "12,3\n10,5\n");
}

#[test]
fn graph_formats() {
    let dir = tempfile::tempdir().unwrap();
    let dot = run(dir.path(), &["graph", "--p", "5", "--g", "2", "--ell", "2", "--kind", "little", "--format", "dot"]);
    let dot = String::from_utf8(dot.stdout).unwrap();
    assert!(dot.starts_with("graph little_g2_l2_p5 {"));
    assert!(dot.contains("v0 (e=72)") && dot.contains("v1 (e=240)"));

    let v = json(&run(dir.path(), &["graph", "--p", "5", "--g", "1", "--ell", "2", "--kind", "little"]));
    let halves = v["edges"].as_array().unwrap().iter().filter(|e| e["half_edge"] == true).count();
    let stripped = json(&run(
        dir.path(),
        &["graph", "--p", "5", "--g", "1", "--ell", "2", "--kind", "little", "--strip-half-edges"],
    ));
    let total = v["edges"].as_array().unwrap().len();
    assert_eq!(stripped["edges"].as_array().unwrap().len(), total - halves);

    let enh = json(&run(dir.path(), &["graph", "--p", "5", "--g", "2", "--ell", "2", "--kind", "enhanced"]));
    assert_eq!(enh["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(strings(&enh["iota_vertex"]), ["2", "3", "0", "1"]);
}

#[test]
fn spectrum_of_p5_g2() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&run(dir.path(), &["spectrum", "--p", "5", "--g", "2", "--ell", "2", "--kind", "big"]));
    assert_eq!(strings(&v["char_poly"]), ["30", "-17", "1"]);
    assert_eq!(v["k"], "15");
    assert_eq!(v["bound_squared"], "56");
    assert_eq!(v["ramanujan"], true);
}

#[test]
fn output_is_independent_of_jobs_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 4] = [
        &["classes", "--p", "13", "--g", "2"],
        &["brandt", "--p", "13", "--g", "2", "--n", "3"],
        &["graph", "--p", "13", "--g", "2", "--ell", "3", "--kind", "enhanced"],
        &["spectrum", "--p", "13", "--g", "2", "--ell", "3", "--kind", "little"],
    ];
    for args in commands {
        let mut seen = Vec::new();
        for extra in [&["--jobs", "1"][..], &["--jobs", "4"], &["--jobs", "4", "--no-cache"], &["--jobs", "2"]] {
            let mut a = args.to_vec();
            a.extend_from_slice(extra);
            let out = run(dir.path(), &a);
            assert_eq!(out.status.code(), Some(0));
            seen.push(out.stdout);
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]), "{args:?}");
    }
}
