use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("interlace-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_interlace")).current_dir(dir).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn scalars(dir: &Path, d: usize) {
    let line = format!("{:?} 0\n", (1.0 / d as f64).sqrt());
    fs::write(dir.join("scalars.csv"), line.repeat(d)).unwrap();
}

const TWO_PROJECTORS: &str = r#"{"m": 2, "include_z_identity": false, "matrices": [
  {"n": 2, "re": [[1, 0], [0, 0]]},
  {"n": 2, "re": [[0, 0], [0, 1]]}
]}"#;

#[test]
fn mixed_char_of_two_projectors() {
    let dir = scratch("mixed");
    fs::write(dir.join("p.json"), TWO_PROJECTORS).unwrap();
    let out = run(&dir, &["mixed-char", "--input", "p.json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["coefficients"], serde_json::json!([1.0, -2.0, 1.0]));
    assert_eq!(r["pass"], true);
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
    assert!(r.get("wall_time").is_none());
}

#[test]
fn ramanujan_family_writes_graph_files() {
    let dir = scratch("ramanujan");
    let args = ["ramanujan", "--degree", "3", "--levels", "2", "--method", "exhaustive", "--seed", "1", "--out", "fam"];
    let out = run(&dir, &args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut graphs: Vec<String> = fs::read_dir(dir.join("fam"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".graph"))
        .collect();
    graphs.sort();
    assert_eq!(graphs, ["level0.graph", "level1.graph", "level2.graph"]);
    let r = report(&out);
    assert_eq!(r["results"]["sizes"], serde_json::json!([6, 12, 24]));
    for c in r["results"]["certificates"].as_array().unwrap() {
        assert!(c["nontrivial_max"].as_f64().unwrap() <= 2.0 * 2f64.sqrt() + 1e-8);
    }
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.join("fam/report.json")).unwrap()).unwrap();
    assert_eq!(saved, r);
    let first = fs::read_to_string(dir.join("fam/level0.graph")).unwrap();
    assert!(first.starts_with("6 9\n"));
}

#[test]
fn exhaustive_weaver_exceeds_the_default_budget() {
    let dir = scratch("weaver");
    scalars(&dir, 24);
    let out = run(&dir, &["weaver", "--input", "scalars.csv", "--r", "2", "--method", "exhaustive"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["pass"], false);
    let out = run(&dir, &["weaver", "--input", "scalars.csv", "--r", "2", "--method", "random", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["results"]["certificate"]["max_norm"].as_f64().unwrap() <= 0.83035);
}

#[test]
fn reports_are_byte_identical_and_verify() {
    let dir = scratch("determinism");
    scalars(&dir, 12);
    let args = ["weaver", "--input", "scalars.csv", "--r", "3", "--method", "random", "--seed", "11", "--out", "o"];
    let a = run(&dir, &args);
    let b = run(&dir, &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = run(&dir, &["verify", "--report", "o/report.json"]);
    assert_eq!(v.status.code(), Some(0));
    assert_eq!(report(&v)["results"]["results_match"], true);

    let mut tampered = report(&a);
    tampered["results"]["certificate"]["max_norm"] = serde_json::json!(0.125);
    fs::write(dir.join("t.json"), serde_json::to_string(&tampered).unwrap()).unwrap();
    assert_eq!(run(&dir, &["verify", "--report", "t.json"]).status.code(), Some(1));
}

#[test]
fn timing_is_opt_in() {
    let dir = scratch("timing");
    fs::write(dir.join("p.json"), TWO_PROJECTORS).unwrap();
    let r = report(&run(&dir, &["mixed-char", "--input", "p.json", "--timing"]));
    assert!(r["wall_time"].as_f64().unwrap() >= 0.0);
}

#[test]
fn plot_data_for_bipartite_spectrum() {
    let dir = scratch("plot");
    let mut text = String::from("6 9\n");
    for u in 0..3 {
        for v in 3..6 {
            text.push_str(&format!("{u} {v}\n"));
        }
    }
    fs::write(dir.join("k33.graph"), text).unwrap();
    let out = run(&dir, &["ramanujan", "--input", "k33.graph", "--plot", "eig.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("eig.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,eigenvalues");
    assert_eq!(lines.len(), 7);
    let stdout = run(&dir, &["ramanujan", "--input", "k33.graph", "--format", "csv"]).stdout;
    assert_eq!(String::from_utf8(stdout).unwrap(), csv);
}

#[test]
fn malformed_inputs_exit_with_usage_errors() {
    let dir = scratch("malformed");
    fs::write(dir.join("bad.json"), "{\"n\": 2, \"re\": [[1, 0],\n [0").unwrap();
    let out = run(&dir, &["pave", "--input", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    fs::write(dir.join("bad.txt"), "1 0\n0.5\n").unwrap();
    let out = run(&dir, &["weaver", "--input", "bad.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    fs::write(dir.join("g.graph"), "3 2\n0 1\n1 2 -1\n").unwrap();
    assert_eq!(run(&dir, &["ramanujan", "--input", "g.graph"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["ramanujan", "--degree", "3", "--method", "sideways"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["weaver", "--input", "missing.csv"]).status.code(), Some(2));
}

#[test]
fn frames_and_paving_commands_pass() {
    let dir = scratch("frames");
    let mut text = String::new();
    for k in 0..6 {
        let mut row = [0.0; 6];
        row[2 * (k % 3)] = 1.0;
        text.push_str(&row.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" "));
        text.push('\n');
    }
    fs::write(dir.join("frame.txt"), &text).unwrap();
    for mode in ["feichtinger", "bt"] {
        let out = run(&dir, &["frames", "split", "--input", "frame.txt", "--mode", mode]);
        assert_eq!(out.status.code(), Some(0), "{mode}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let out = run(&dir, &["frames", "bounds", "--input", "frame.txt", "--kind", "frame"]);
    let r = report(&out);
    assert!((r["results"]["upper"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let n = 8;
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![1.0 / n as f64; n]).collect();
    let m = serde_json::json!({"n": n, "re": rows});
    fs::write(dir.join("j.json"), m.to_string()).unwrap();
    let out = run(&dir, &["pave", "--input", "j.json", "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["mode"], "projector");
}
