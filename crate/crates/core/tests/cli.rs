use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attractor-lab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const E1: &str = r#"{"experiment":"E1","seed":4,"families":5,"violating_families":2,"ensemble_size":4}"#;

/// Linear E2 over a horizon too short for the late rate to settle.
const E2_SHORT: &str = r#"{"experiment":"E2","seed":1,"grid":{"dimension":1,"modes":8,"length":1.0},
"phi":{"coefficients":[0.0],"sigma":1.0},"ensemble_size":4,"t_final":2.0,"dt":0.01}"#;

#[test]
fn run_then_verify() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "e1.json", E1);
    let out = tmp.path().join("out");
    let o = cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    for f in ["report.json", "trajectories.jsonl", "decay.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(out.join("decay.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,dist,bound"));

    let report = out.join("report.json");
    let o = cli(&["verify", "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("0 inconsistencies"));
}

#[test]
fn identical_seed_gives_identical_report() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "e1.json", E1);
    let mut reports = Vec::new();
    for d in ["a", "b"] {
        let out = tmp.path().join(d);
        assert_eq!(code(&cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()])), 0);
        reports.push(fs::read(out.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);

    let out = tmp.path().join("c");
    assert_eq!(code(&cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "5"])), 0);
    assert_ne!(fs::read(out.join("report.json")).unwrap(), reports[0]);
}

#[test]
fn failing_check_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "e2.json", E2_SHORT);
    let out = tmp.path().join("out");
    let o = cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL linear_rate_vs_delta"));
    // the report is still written and verifies as consistent but failing
    let o = cli(&["verify", "--report", out.join("report.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("0 inconsistencies"));
}

#[test]
fn tampered_report_is_inconsistent() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "e1.json", E1);
    let out = tmp.path().join("out");
    assert_eq!(code(&cli(&["run", "--config", &cfg, "--out", out.to_str().unwrap()])), 0);
    let path = out.join("report.json");
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let d = v["decay_table"][3]["dist"].as_f64().unwrap();
    v["decay_table"][3]["dist"] = serde_json::json!(d * 1.01 + 1e-3);
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let o = cli(&["verify", "--report", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("INCONSISTENT"));

    v["config"]["seed"] = serde_json::json!(99);
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    assert!(stdout(&cli(&["verify", "--report", path.to_str().unwrap()])).contains("config hash"));
}

#[test]
fn configuration_errors_exit_two() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&cli(&["run", "--config", "/nonexistent/cfg.json"])), 2);
    let bad = write_config(tmp.path(), "bad.json", r#"{"experiment":"E2","seed":1,"colour":"red"}"#);
    assert_eq!(code(&cli(&["run", "--config", &bad])), 2);
    let no_seed = write_config(tmp.path(), "noseed.json", r#"{"experiment":"E2"}"#);
    assert_eq!(code(&cli(&["run", "--config", &no_seed])), 2);
    let empty = write_config(tmp.path(), "empty.json", r#"{"experiment":"E2","seed":1,"ensemble_size":0}"#);
    let out = tmp.path().join("out");
    assert_eq!(code(&cli(&["run", "--config", &empty, "--out", out.to_str().unwrap()])), 2);

    let junk = write_config(tmp.path(), "report.json", "not json");
    assert_eq!(code(&cli(&["verify", "--report", &junk])), 2);
    assert_eq!(code(&cli(&["certify", "--beta", "exp:1,2", "--J", "const:1", "--tstar", "1"])), 2);
    assert_eq!(code(&cli(&["certify", "--beta", "exp:1,1,0", "--J", "const:1", "--tstar", "-3"])), 2);
    assert_eq!(code(&cli(&["bogus"])), 2);
}

#[test]
fn certify_prints_constants() {
    let o = cli(&["certify", "--beta", "exp:2,1,0.5", "--J", "affine:1,1", "--tstar", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let r_star: f64 = text
        .lines()
        .find(|l| l.starts_with("R_star"))
        .and_then(|l| l.split_whitespace().nth(1))
        .and_then(|v| v.parse().ok())
        .unwrap();
    let beta_star = 2.0 * (-2f64).exp() + 0.5;
    assert!((r_star - 6.0 / (1.0 - beta_star)).abs() < 1e-8);

    let o = cli(&[
        "certify", "--beta", "exp:1,1,0", "--J", "const:2", "--tstar", "auto", "--alpha", "exp:1,1,0", "--r0", "3",
        "--radius", "50", "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let t_star = v["tec"]["t_star"].as_f64().unwrap();
    assert!((t_star - 2f64.ln()).abs() < 1e-8);
    assert!((v["attraction"]["omega"].as_f64().unwrap() - 1.0).abs() < 1e-7);
    assert!(v["entering"][1].as_u64().unwrap() >= 1);
}
