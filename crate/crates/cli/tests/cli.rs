use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_capgraph"))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn scenario_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn every_bundled_scenario_passes() {
    let files = scenario_files();
    assert!(files.len() >= 20);
    for f in files {
        let out = run(&["run", f.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", f.display(), String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn batch_run_is_deterministic_across_jobs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let dir = scenarios_dir();
    let d = dir.to_str().unwrap();
    let one = run(&["run", d, "--out", a.path().to_str().unwrap(), "--jobs", "1"]);
    let four = run(&["run", d, "--out", b.path().to_str().unwrap(), "--jobs", "4"]);
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stdout));
    assert_eq!(one.stdout, four.stdout);
    for f in scenario_files() {
        let stem = f.file_stem().unwrap();
        let ja = std::fs::read(a.path().join(stem).join("result.json")).unwrap();
        let jb = std::fs::read(b.path().join(stem).join("result.json")).unwrap();
        assert_eq!(ja, jb, "{}", stem.to_string_lossy());
    }
}

#[test]
fn params_menu_lists_minimal_row() {
    let out = run(&["params", "menu", "--set", "m=3", "--set", "kappa=1", "--set", "H=0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let menu = v["menu"].as_array().unwrap();
    assert!(menu
        .iter()
        .any(|e| e["A"].as_f64() == Some(1.0) && (e["C"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15));
    for key in ["inputs", "menu"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn params_check_reports_both_verdicts() {
    let out = run(&["params", "check", "--set", "m=3", "--set", "kappa=1", "--set", "H=0", "--set", "C=1.5", "--set", "A=1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["inputs", "case_label", "verdict", "slack", "menu", "branch_verdict", "infimum_verdict"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    // C below √(m−1) κ with H = 0 breaks the gate
    let out = run(&["params", "check", "--set", "m=3", "--set", "kappa=1", "--set", "H=0", "--set", "C=1", "--set", "A=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], Value::Bool(false));
}

#[test]
fn exact_eval_writes_identity_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "exact", "eval", "--set", "H=0", "--set", "b1=0", "--set", "c1=-1", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("exact-eval").join("data.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,u,du,W,z"));
    let mut rows = 0;
    for line in lines {
        let c: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((c[1] - c[0]).abs() <= 1e-15 * c[0].max(1.0));
        assert!((c[3] - 2f64.sqrt()).abs() < 1e-15);
        rows += 1;
    }
    assert_eq!(rows, 101);
    assert!(dir.path().join("exact-eval").join("result.json").exists());
}

#[test]
fn verify_poincare_on_bundled_strip() {
    let cfg = scenarios_dir().join("verify-poincare-strip.toml");
    let out = run(&["verify", "poincare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let entries = v["report"]["entries"].as_array().unwrap();
    let slack = entries.iter().find(|e| e["name"] == "slack").unwrap();
    let h = v["report"]["grid"]["h_max"].as_f64().unwrap();
    assert!(slack["value"].as_f64().unwrap().abs() <= 10.0 * h * h);
}

#[test]
fn floats_carry_17_significant_digits() {
    let out = run(&["params", "menu", "--set", "m=3", "--set", "kappa=1", "--set", "H=0"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1.4142135623730951e0"), "{text}");
}

#[test]
fn malformed_config_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "command = \"verify\"\naction = \"kato\"\n[inputs]\nfield = \"strip\"\nn = \"lots\"\n").unwrap();
    let out = run(&["run", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stdout);
    assert!(msg.contains("line 5") && msg.contains("n"), "{msg}");

    std::fs::write(&p, "command = \"verify\"\naction = \"kato\n").unwrap();
    let out = run(&["verify", "kato", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_fields_and_tolerances_exit_2() {
    let out = run(&["verify", "kato", "--set", "field=strip", "--set", "nn=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nn"));
    let out = run(&["verify", "kato", "--set", "field=strip", "--tol", "residual=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerances.residual"));
}

#[test]
fn failed_verification_exits_1() {
    // a tolerance far below the discretization error
    let out = run(&["verify", "boundary", "--set", "field=strip", "--set", "n=17", "--tol", "abs=1e-14"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], Value::Bool(false));
}

#[test]
fn precondition_failure_exits_1() {
    // φ straddles the cap's centre, where v̄ changes sign
    let out = run(&["verify", "poincare", "--set", "field=hemisphere", "--set", "phi=[[-0.3, 0.3], [-0.3, 0.3]]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"].as_str().unwrap().contains("precondition"));
}

#[test]
fn infeasible_solve_exits_1() {
    let out = run(&["solve", "radial", "--set", "radius=3", "--set", "H=1", "--set", "dirichlet=[0.0]"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["error"].as_str().unwrap().contains("infeasible"));
}

#[test]
fn solve_writes_report_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenarios_dir().join("solve-slab-minimal.toml");
    let out = run(&["solve", "slab", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let u = v["report"]["u"].as_array().unwrap();
    let r = v["report"]["r"].as_array().unwrap();
    for (u, r) in u.iter().zip(r) {
        assert!((u.as_f64().unwrap() - r.as_f64().unwrap()).abs() < 1e-10);
    }
    assert!(v["report"]["gradient_bound"]["verdict"].as_bool().unwrap());
    assert!(dir.path().join("solve-slab-minimal").join("data.csv").exists());
}

#[test]
fn config_for_another_command_is_rejected() {
    let cfg = scenarios_dir().join("solve-slab-minimal.toml");
    let out = run(&["verify", "kato", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
