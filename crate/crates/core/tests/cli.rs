use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dtlocus::cli::parse_input;
use serde_json::Value;
use tempfile::TempDir;

const P1: &str = r#"{"alpha":1, "delay":1, "zeros":[], "poles":[[0,0]]}"#;
const P2: &str = r#"{"num":[50,-10,1], "den":[1.25,4.25,4,1], "delay":1}"#;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn dtlocus(input: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtlocus"))
        .arg(input)
        .args(args)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn single_pole_json() {
    let dir = TempDir::new().unwrap();
    let out = dtlocus(&write(&dir, "p1.json", P1), &["--sigma0", "-2", "--kmax", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    let branches = doc["branch_points"].as_array().unwrap();
    assert_eq!(branches.len(), 1);
    assert!((branches[0]["re"].as_f64().unwrap() + 1.0).abs() < 1e-10);
    assert!((branches[0]["k"].as_f64().unwrap() - 0.36788).abs() < 1e-5);
    assert_eq!(branches[0]["multiplicity"], 2);
    assert_eq!(doc["crossings"]["inward"].as_array().unwrap().len(), 1);
    assert!(!doc["trajectories"].as_array().unwrap().is_empty());
}

#[test]
fn csv_header_and_rows() {
    let dir = TempDir::new().unwrap();
    let out = dtlocus(
        &write(&dir, "p1.json", P1),
        &["--sigma0", "-2", "--kmax", "1", "--format", "csv"],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("traj_id,sigma,omega,k"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(row.len(), 4);
}

#[test]
fn example_svg_markers() {
    let dir = TempDir::new().unwrap();
    let svg = dir.path().join("plot.svg");
    let out_json = dir.path().join("out.json");
    let out = dtlocus(
        &write(&dir, "p2.json", P2),
        &[
            "--sigma0",
            "-3.5",
            "--kmax",
            "5",
            "--out",
            out_json.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let body = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(body.matches("class=\"marker pole\"").count(), 3);
    assert_eq!(body.matches("class=\"marker zero\"").count(), 2);
    assert_eq!(body.matches('×').count(), 3);
    assert_eq!(body.matches('○').count(), 2);
    assert!(body.contains("◆"));
    assert!(body.contains(r#"data-sigma0="-3.5""#));
    assert!(body.contains("<polyline"));
    assert!(out_json.exists());
}

#[test]
fn plant_block_round_trips() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p2.json", P2);
    let out = dtlocus(&input, &["--sigma0", "-3.5", "--kmax", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let block = serde_json::to_vec(&doc["plant"]).unwrap();
    let reparsed = parse_input(&block).unwrap();
    let original = parse_input(P2.as_bytes()).unwrap();
    assert_eq!(reparsed, original);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p2.json", P2);
    let args = ["--sigma0", "-3.5", "--kmax", "5", "--negative-gains"];
    let a = dtlocus(&input, &args);
    let b = dtlocus(&input, &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn invalid_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad_delay = write(&dir, "bad.json", r#"{"alpha":1, "delay":-1, "poles":[[0,0]]}"#);
    let out = dtlocus(&bad_delay, &["--sigma0", "-2", "--kmax", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delay must be positive"));

    let good = write(&dir, "p1.json", P1);
    assert_eq!(dtlocus(&good, &["--sigma0", "-2", "--kmax", "0"]).status.code(), Some(2));
    assert_eq!(dtlocus(&good, &["--sigma0", "0", "--kmax", "1"]).status.code(), Some(2));
    assert_eq!(dtlocus(&good, &["--kmax", "1"]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    let out = dtlocus(Path::new("/nonexistent/plant.json"), &["--sigma0", "-2", "--kmax", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn strict_step_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "p1.json", P1);
    let args = ["--sigma0", "-2", "--kmax", "1", "--tol", "1e-300"];
    let lenient = dtlocus(&input, &args);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("warning"));
    let strict = dtlocus(&input, &[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(3));
}
