use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const UNIT_SEGMENT: &str = r#"{"root": [0.0, 0.0], "branches": [
    {"id": 1, "parent": null, "end": [1.0, 0.0], "multiplicity": [{"from_s": 0.0, "value": 1.0}]}
]}"#;

const THREE_PATHS: &str = r#"{"groups": [
    {"mass": 1.0, "path": [[0, 0], [0, 1], [-1, 2]]},
    {"mass": 1.0, "path": [[0, 0], [0, 1], [1, 2], [0.5, 3]]},
    {"mass": 1.0, "path": [[0, 0], [0, 1], [1, 2], [2, 3]]}
]}"#;

const ATOMS: &str = r#"{"atoms": [
    {"point": [0.3, 0.3], "mass": 1.5},
    {"point": [-0.2, 0.1], "mass": 0.25},
    {"point": [-0.4, -0.45], "mass": 0.05}
]}"#;

fn irrigate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irrigate"))
        .args(args)
        .output()
        .expect("run irrigate")
}

fn file(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn solve_reports_unit_segment_cost() {
    let dir = TempDir::new().unwrap();
    let net = file(&dir, "net.json", UNIT_SEGMENT);
    let v = json(&irrigate(&[
        "solve",
        "--network",
        &net,
        "--f",
        "power:1,0.5",
        "--alpha",
        "1",
    ]));
    assert_eq!(v["cost"].as_f64().unwrap(), 1.5833333333333333);
    assert_eq!(v["weights"][0]["w_at_a_plus"].as_f64().unwrap(), 2.25);
}

#[test]
fn split_yields_five_branches_and_round_trips() {
    let dir = TempDir::new().unwrap();
    let plan = file(&dir, "plan.json", THREE_PATHS);
    let text = stdout(&irrigate(&["split", "--plan", &plan]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["branches"].as_array().unwrap().len(), 5);

    let out = dir.path().join("split.json");
    let o = irrigate(&["split", "--plan", &plan, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let written = std::fs::read_to_string(&out).unwrap();
    assert_eq!(written.trim_end(), text.trim_end());

    // solving the written network reports the same structure
    let solved = json(&irrigate(&[
        "solve",
        "--network",
        out.to_str().unwrap(),
        "--f",
        "zero",
        "--alpha",
        "1",
    ]));
    assert_eq!(solved["weights"].as_array().unwrap().len(), 5);
}

#[test]
fn dyadic_output_is_deterministic_and_reloadable() {
    let dir = TempDir::new().unwrap();
    let mu = file(&dir, "mu.json", ATOMS);
    let run = |threads: &str, out: &Path| {
        let o = Command::new(env!("CARGO_BIN_EXE_irrigate"))
            .env("IRRIGATE_THREADS", threads)
            .args([
                "dyadic",
                "--measure",
                &mu,
                "--n",
                "4",
                "--f",
                "power:1,0.85",
                "--alpha",
                "0.85",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("1", &dir.path().join("a.json"));
    let b = run("4", &dir.path().join("b.json"));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    // at least one chain of four centers down to a finest cube
    assert!(v["branches"].as_array().unwrap().len() >= 4);
    let net = dir.path().join("a.json");
    let solved = json(&irrigate(&[
        "solve",
        "--network",
        net.to_str().unwrap(),
        "--f",
        "power:1,0.85",
        "--alpha",
        "0.85",
    ]));
    assert!(solved["cost"].as_f64().unwrap() > 0.0);
}

#[test]
fn hybrid_reports_certificate() {
    let dir = TempDir::new().unwrap();
    let mu = file(&dir, "mu.json", ATOMS);
    let v = json(&irrigate(&[
        "hybrid",
        "--measure",
        &mu,
        "--n",
        "5",
        "--f",
        "power:1,0.85",
        "--alpha",
        "0.85",
        "--z0",
        "1",
    ]));
    let text = v.to_string();
    assert!(text.contains("shortcut_count"), "{text}");
    assert!(text.contains("n0"), "{text}");
}

#[test]
fn sweep_writes_csv() {
    let dir = TempDir::new().unwrap();
    let mu = file(
        &dir,
        "mu.json",
        r#"{"lebesgue": {"dim": 2, "edge": 1.0, "mass": 1.0}}"#,
    );
    let csv = stdout(&irrigate(&[
        "sweep",
        "--measure",
        &mu,
        "--f",
        "power:1,0.85",
        "--alpha",
        "0.85",
        "--n-min",
        "1",
        "--n-max",
        "4",
    ]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "n,max_weight,cost,shortcut_count,bound_weight,bound_cost"
    );
    assert_eq!(lines.len(), 5);
    let costs: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(costs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn classify_prints_verdicts() {
    let out = stdout(&irrigate(&[
        "classify", "--d", "2", "--alpha", "0.9", "--beta", "0.9",
    ]));
    assert!(out.starts_with("Irrigable"), "{out}");
    let out = stdout(&irrigate(&[
        "classify", "--d", "2", "--alpha", "0.4", "--beta", "0.9",
    ]));
    assert!(out.starts_with("NonIrrigable"), "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(irrigate(&["--help"]).status.code(), Some(0));
    assert_eq!(irrigate(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(
        irrigate(&[
            "solve",
            "--network",
            "/nonexistent/net.json",
            "--f",
            "zero",
            "--alpha",
            "1"
        ])
        .status
        .code(),
        Some(1)
    );
    let dir = TempDir::new().unwrap();
    let net = file(&dir, "net.json", UNIT_SEGMENT);
    assert_eq!(
        irrigate(&["solve", "--network", &net, "--f", "cubic", "--alpha", "1"])
            .status
            .code(),
        Some(2)
    );
    let bad = file(
        &dir,
        "bad.json",
        &UNIT_SEGMENT.replace("\"value\": 1.0", "\"value\": -1.0"),
    );
    assert_eq!(
        irrigate(&["solve", "--network", &bad, "--f", "zero", "--alpha", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        irrigate(&["bounds", "--d", "2", "--alpha", "0.9", "--beta", "0.5"])
            .status
            .code(),
        Some(3)
    );
}
