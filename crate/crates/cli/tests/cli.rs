use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nonbayes"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_shrink_underreacts() {
    let o = run(&["classify", path_str(&scenario("binary_shrink.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("underreacts to information: true"), "{out}");
    assert_eq!(out.matches(" under ").count(), 2, "{out}");
}

#[test]
fn classify_grether_overreacts_everywhere() {
    let o = run(&["classify", "--json", "--scenario", path_str(&scenario("binary_grether.json"))]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let tags: Vec<&str> = v["reactions"].as_array().unwrap().iter().map(|r| r["tag"].as_str().unwrap()).collect();
    assert_eq!(tags, ["over", "over"]);
}

#[test]
fn malformed_scenario_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"environment": {"likelihoods": {"H": [0.8, 0.2], "L": [0.2, 0.8]}}, "rule": {"kind": "bayesian"}}"#).unwrap();
    let o = run(&["classify", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("prior"), "{}", stderr(&o));

    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["classify", path_str(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["classify", path_str(&dir.path().join("missing.json"))]).status.code(), Some(2));
}

#[test]
fn exploit_overreaction_hits_target() {
    let o = run(&["exploit", path_str(&scenario("binary_overreaction.json")), "--k", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((c["achieved_payoff"].as_f64().unwrap() + 1.0).abs() <= 1e-9);
    assert_eq!(c["construction"], "outside_hull");
    assert!(stderr(&o).contains("achieved payoff: -1"), "{}", stderr(&o));
}

#[test]
fn exploit_refuses_underreaction_and_unknown() {
    let o = run(&["exploit", path_str(&scenario("binary_shrink.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("verdict: unexploitable"));
    assert!(stdout(&o).contains("reason: underreacts to information"));

    let o = run(&["exploit", path_str(&scenario("ternary_unknown.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("verdict: unknown"));
}

#[test]
fn exploit_input_errors_exit_2() {
    let s = scenario("binary_overreaction.json");
    assert_eq!(run(&["exploit", path_str(&s), "--k", "-1"]).status.code(), Some(2));
    let c = scenario("binary_confirmatory.json");
    assert_eq!(run(&["exploit", path_str(&c), "--epsilon", "10"]).status.code(), Some(2));
    assert_eq!(run(&["exploit", path_str(&c), "--epsilon", "0.01"]).status.code(), Some(0));
}

#[test]
fn simulate_matches_analytic_and_is_deterministic() {
    let s = scenario("binary_bayesian.json");
    let args = ["simulate", path_str(&s), "--trials", "1000000", "--seed", "5", "--json", "--self-check"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!((r["analytic"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    let gap = (r["mean"].as_f64().unwrap() - 0.3).abs();
    assert!(gap <= 4.0 * r["std_error"].as_f64().unwrap(), "{r}");
    assert_eq!(run(&args).stdout, a.stdout);
}

#[test]
fn simulate_input_errors_exit_2() {
    let s = scenario("binary_bayesian.json");
    assert_eq!(run(&["simulate", path_str(&s), "--trials", "0"]).status.code(), Some(2));
    let no_dp = scenario("binary_overreaction.json");
    assert_eq!(run(&["simulate", path_str(&no_dp), "--trials", "10"]).status.code(), Some(2));
}

#[test]
fn emitted_contract_reproduces_target_by_simulation() {
    let dir = tempfile::tempdir().unwrap();
    for (name, k) in [("binary_overreaction.json", "2.5"), ("binary_confirmatory.json", "1"), ("ternary_power.json", "3")] {
        let s = scenario(name);
        let contract = dir.path().join(format!("{name}.contract"));
        let o = run(&["exploit", path_str(&s), "--k", k, "--out", path_str(&contract)]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let o = run(&[
            "simulate",
            path_str(&s),
            "--contract",
            path_str(&contract),
            "--trials",
            "1000000",
            "--seed",
            "9",
            "--json",
            "--self-check",
        ]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let r: Value = serde_json::from_slice(&o.stdout).unwrap();
        let k: f64 = k.parse().unwrap();
        assert!((r["analytic"].as_f64().unwrap() + k).abs() <= 1e-9 * k);
        assert!((r["mean"].as_f64().unwrap() + k).abs() <= 4.0 * r["std_error"].as_f64().unwrap(), "{name}: {r}");
    }
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&["verify", "theorem1", "--trials", "10000", "--seed", "7", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["trials"], 10000);
    assert_eq!(r["failures"].as_array().unwrap().len(), 0);

    assert_eq!(run(&["verify", "no_such_suite"]).status.code(), Some(2));

    let o = run(&["verify", "--suite", "theorem1", "--mutant", "--trials", "25", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("seed 3"), "{}", stdout(&o));
}

#[test]
fn verify_is_deterministic() {
    let a = run(&["verify", "prop2", "--trials", "50", "--seed", "11"]);
    let b = run(&["verify", "prop2", "--trials", "50", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn grether_sweep_flips_above_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let svg_path = dir.path().join("sweep.svg");
    let s = scenario("binary_grether.json");
    let o = run(&[
        "sweep",
        path_str(&s),
        "--param",
        "beta",
        "--grid",
        "0.25,0.5,1,2,4",
        "--out",
        path_str(&csv_path),
        "--svg",
        path_str(&svg_path),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["parameter", "value", "reaction_H", "lambda_H", "reaction_L", "lambda_L", "verdict", "achieved_loss", "ex_ante_payoff"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    for row in &rows {
        let beta: f64 = row[1].parse().unwrap();
        let verdict = &row[6];
        if beta > 1.0 {
            assert_eq!(verdict, "exploitable");
            assert_eq!((&row[2], &row[4]), ("over", "over"));
            assert!((row[7].parse::<f64>().unwrap() - 1.0).abs() <= 1e-9);
        } else {
            assert_eq!(verdict, "unexploitable");
            assert!(row[7].is_empty());
        }
        assert!((row[8].parse::<f64>().unwrap() - 0.3).abs() < 1e-12);
    }
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<?xml") && svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("stroke=\"crimson\"").count(), 2);
}

#[test]
fn sweep_triangle_and_four_state_figures() {
    let dir = tempfile::tempdir().unwrap();
    let svg3 = dir.path().join("t.svg");
    let o = run(&["sweep", path_str(&scenario("ternary_power.json")), "--param", "beta", "--grid", "0.5,2", "--svg", path_str(&svg3)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&svg3).unwrap().contains("<polygon"));

    let svg4 = dir.path().join("f.svg");
    let o = run(&["sweep", path_str(&scenario("four_state_shrink.json")), "--param", "lambda", "--grid", "0,0.5", "--svg", path_str(&svg4)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert!(stderr(&o).contains("SVG skipped"));
    assert!(!svg4.exists());
}

#[test]
fn invalid_sweeps_exit_2() {
    let s = scenario("binary_grether.json");
    assert_eq!(run(&["sweep", path_str(&s), "--param", "beta"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", path_str(&s), "--param", "lambda", "--grid", "1"]).status.code(), Some(2));
    let shrink = scenario("binary_shrink.json");
    let o = run(&["sweep", path_str(&shrink), "--param", "lambda.H", "--grid", "0.5,1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty(), "nothing emitted before validation");
}

#[test]
fn shipped_scenarios_load() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let o = run(&["classify", path_str(&path)]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", path.display(), stderr(&o));
    }
}
