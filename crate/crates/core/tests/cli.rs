use std::path::PathBuf;
use std::process::{Command, Output};

use picod::instance::PicodInstance;

fn picod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_picod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("picod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn row<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find(|l| l.split("  ").next().map(str::trim) == Some(key))
        .map(|l| l[key.len()..].trim())
}

#[test]
fn gen_complete_sigma() {
    let o = picod(&["gen", "complete-sigma", "--m", "4", "--sigma", "0,2"]);
    assert!(o.status.success());
    let inst = PicodInstance::load(stdout(&o).as_bytes()).unwrap().instance;
    assert_eq!(inst.n(), 7);
}

#[test]
fn gen_random_is_deterministic() {
    let a = scratch("r1.json");
    let b = scratch("r2.json");
    for p in [&a, &b] {
        let o = picod(&[
            "gen",
            "random",
            "--m",
            "4",
            "--n",
            "5",
            "--seed",
            "7",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn gen_builtins_and_partition() {
    let o = picod(&["gen", "example2"]);
    let inst = PicodInstance::load(stdout(&o).as_bytes()).unwrap().instance;
    assert_eq!(inst.n(), 11);
    let o = picod(&[
        "gen",
        "partition",
        "--m",
        "4",
        "--levels",
        "1,2,3,4;1,2|3,4",
    ]);
    assert_eq!(stdout(&o).trim(), r#"{"m":4,"clients":[[],[1,2],[3,4]]}"#);
}

#[test]
fn json_round_trips() {
    let o = picod(&["gen", "example2"]);
    let text = stdout(&o);
    let inst = PicodInstance::load(text.as_bytes()).unwrap().instance;
    assert_eq!(inst.to_json(), text.trim());
}

#[test]
fn analyze_example_certified() {
    let json = scratch("analyze.json");
    let o = picod(&[
        "analyze",
        "example2",
        "--all",
        "--exact",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    for key in ["eta_lb", "eta", "tau1", "tau2", "beta_lin_q2"] {
        assert_eq!(row(&text, key), Some("3"), "{key} in\n{text}");
    }
    assert!(row(&text, "status").unwrap().starts_with("certified"));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(json).unwrap()).unwrap();
    assert_eq!(v["certified"], true);
    assert_eq!(
        v["exact"][0]["witness"]["rows"].as_array().unwrap().len(),
        3
    );
}

#[test]
fn analyze_two_clients() {
    let path = scratch("two.json");
    std::fs::write(&path, r#"{"m":3,"clients":[[1],[2,3]]}"#).unwrap();
    let o = picod(&[
        "analyze",
        path.to_str().unwrap(),
        "--all",
        "--exact",
        "--q",
        "2,3",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    for key in [
        "eta_lb",
        "eta",
        "tau1",
        "tau2",
        "beta_lin_q2",
        "beta_lin_q3",
    ] {
        assert_eq!(row(&text, key), Some("1"), "{key}");
    }
    assert!(text.contains("linear, fields tested 2,3"));
    assert!(row(&text, "status").unwrap().starts_with("certified"));
}

#[test]
fn analyze_budget_exit_code() {
    let path = scratch("big.json");
    let o = picod(&[
        "gen",
        "random",
        "--m",
        "10",
        "--n",
        "6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = picod(&[
        "analyze",
        path.to_str().unwrap(),
        "--exact",
        "--budget-m",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn invalid_input_exit_code() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"m":2,"clients":[[1,2]]}"#).unwrap();
    assert_eq!(
        picod(&["analyze", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(picod(&["analyze", "no-such-file"]).status.code(), Some(2));
    assert_eq!(
        picod(&["analyze", "example2", "--q", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(picod(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_example_scheme() {
    let path = scratch("scheme.json");
    std::fs::write(&path, r#"{"q":2,"rows":[[1,0,0,0],[0,1,0,1],[1,1,1,0]]}"#).unwrap();
    let o = picod(&["verify", "example2", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("transmission 1: {1,3,8,9,10}"));
    assert!(text.contains("transmission 2: {2,4,5,7}"));
    assert!(text.contains("transmission 3: {6,11}"));
    assert!(text.contains("11/11 satisfied"));
}

#[test]
fn verify_partial_scheme_fails() {
    let path = scratch("first-row.json");
    std::fs::write(&path, r#"{"q":2,"rows":[[1,0,0,0]]}"#).unwrap();
    let o = picod(&["verify", "example2", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("5/11 satisfied"));
}

#[test]
fn verify_dimension_mismatch() {
    let path = scratch("wide.json");
    std::fs::write(&path, r#"{"q":2,"rows":[[1,0,0,0,0]]}"#).unwrap();
    let o = picod(&["verify", "example2", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn greedy_scheme_verifies() {
    let path = scratch("greedy.json");
    let o = picod(&["scheme", "singletons-3", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let o = picod(&["verify", "singletons-3", path.to_str().unwrap()]);
    assert!(o.status.success());
}

#[test]
fn sweeps_report_zero() {
    let o = picod(&["sweep", "lemma8", "--m-max", "3", "--q", "2,3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 mismatches"));
    let o = picod(&["sweep", "lemma7", "--m-max", "3"]);
    assert!(o.status.success());
    let o = picod(&["sweep", "sandwich", "--m", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("63 instances, 0 violations"));
    let o = picod(&["sweep", "sigma", "--m-max", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 violations"));
}

#[test]
fn jobs_flag_keeps_output() {
    let a = picod(&["analyze", "example2", "--all", "--jobs", "1"]);
    let b = picod(&["analyze", "example2", "--all", "--jobs", "4"]);
    assert_eq!(stdout(&a), stdout(&b));
}
