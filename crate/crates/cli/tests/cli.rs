use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simplemenu")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn ratio(args: &[&str]) -> f64 {
    json_of(&run(args))["ratio"].as_f64().unwrap()
}

#[test]
fn solve_support_closed() {
    let v = json_of(&run(&["solve", "--set", "support", "--vlo", "1", "--vbar", "100", "--n", "2", "--method", "closed"]));
    let prices: Vec<f64> = v["mechanism"]["prices"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).collect();
    assert!((prices[0] - 1.0).abs() < 1e-12 && (prices[1] - 10.0).abs() < 1e-12);
    assert!((v["ratio"].as_f64().unwrap() - 1.0 / 19.0).abs() < 1e-12);
}

#[test]
fn solve_quantile_and_collapsed_mean() {
    let r = ratio(&["solve", "--set", "quantile", "--omega", "0.5", "--xi", "0.25", "--vbar", "1", "--n", "2"]);
    assert!((r - 0.375).abs() < 1e-12);
    assert_eq!(ratio(&["solve", "--set", "mean", "--mu", "1", "--vbar", "1", "--n", "1"]), 1.0);
}

#[test]
fn lp_at_closed_form_prices_matches_closed_form() {
    let closed = json_of(&run(&["solve", "--set", "support", "--vlo", "1", "--vbar", "50", "--n", "3"]));
    let prices: Vec<String> = closed["mechanism"]["prices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| format!("{:.17e}", p.as_f64().unwrap()))
        .collect();
    let joined = prices.join(",");
    let lp = ratio(&["solve", "--set", "support", "--vlo", "1", "--vbar", "50", "--method", "lp", "--prices", &joined]);
    assert!((lp - closed["ratio"].as_f64().unwrap()).abs() < 1e-7);
}

#[test]
fn grid_inf_is_labelled_lower_bound() {
    let v = json_of(&run(&["solve", "--set", "support", "--vlo", "1", "--vbar", "1", "--n", "inf", "--method", "grid", "--gridsize", "50"]));
    assert_eq!(v["lower_bound"], true);
    assert_eq!(v["ratio"].as_f64().unwrap(), 1.0);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "--set", "mean", "--vbar", "1"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--set", "mean", "--mu", "1", "--n", "zero"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--set", "mean", "--mu", "2", "--vbar", "1"]).status.code(), Some(3));
    assert_eq!(run(&["reproduce", "fig-nothing"]).status.code(), Some(2));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_closed_form_support_mechanism() {
    let dir = tempfile::tempdir().unwrap();
    let closed = json_of(&run(&["solve", "--set", "support", "--vlo", "1", "--vbar", "100", "--n", "2"]));
    let mech = write(dir.path(), "m.json", &closed["mechanism"].to_string());
    let cert = json_of(&run(&["verify", &mech, "--set", "support", "--vlo", "1", "--vbar", "100"]));
    assert!((cert["ratio"].as_f64().unwrap() - 1.0 / 19.0).abs() < 1e-7);
    assert!(cert["atoms"].as_array().unwrap().len() >= 1);
}

#[test]
fn verify_example_mechanism_against_partial_information() {
    let dir = tempfile::tempdir().unwrap();
    let mech = write(dir.path(), "m.json", r#"{"prices":[40,100],"probs":[0.8333333333333334,0.16666666666666666],"vbar":100}"#);
    let set = write(dir.path(), "s.json", r#"{"kind":"quantile","params":{"constraints":[{"omega":40,"xi":0.6}]},"vbar":100}"#);
    let cert = json_of(&run(&["verify", &mech, "--set-file", &set]));
    assert!(cert["ratio"].as_f64().unwrap() <= 25.0 / 28.0 + 1e-12);
}

#[test]
fn verify_rejects_mismatched_vbar() {
    let dir = tempfile::tempdir().unwrap();
    let mech = write(dir.path(), "m.json", r#"{"prices":[0.3],"probs":[1],"vbar":2}"#);
    let out = run(&["verify", &mech, "--set", "mean", "--mu", "0.5", "--vbar", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_meanvar_mechanism() {
    let dir = tempfile::tempdir().unwrap();
    let closed = json_of(&run(&["solve", "--set", "meanvar", "--mu", "1", "--sigma", "0.5", "--n", "2"]));
    let mech = write(dir.path(), "m.json", &closed["mechanism"].to_string());
    let cert = json_of(&run(&["verify", &mech, "--set", "meanvar", "--mu", "1", "--sigma", "0.5", "--gridsize", "1000"]));
    assert!(cert["ratio"].as_f64().unwrap() >= closed["ratio"].as_f64().unwrap() - 1e-9);
}

fn reproduce(target: &str, dir: &Path) -> String {
    let out = run(&["reproduce", target, "--out-dir", dir.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(dir.join(format!("{target}.csv"))).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(2).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn table2_row_matches_published_percentages() {
    let dir = tempfile::tempdir().unwrap();
    let csv = reproduce("table2-row2", dir.path());
    assert!(csv.starts_with("# simplemenu"));
    let expected = [43.93, 25.82, 13.25, 8.74, 6.49, 5.15, 4.27, 3.65, 3.18, 2.82, 2.53];
    for (row, want) in rows(&csv).iter().zip(expected) {
        let pct: f64 = row[2].parse().unwrap();
        assert!((pct - want).abs() <= 0.01, "{row:?}");
    }
}

#[test]
fn support_figure_ends_at_one_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let csv = reproduce("fig-support", a.path());
    assert_eq!(csv, reproduce("fig-support", b.path()));
    let last = rows(&csv).pop().unwrap();
    assert_eq!(last[0], "1");
    assert!(last[1..].iter().all(|c| c == "1"), "{last:?}");
}

#[test]
fn compareball_first_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = reproduce("fig-compareball", dir.path());
    let r = rows(&csv);
    assert_eq!(r.len(), 10);
    assert_eq!(r[0], vec!["1", "0.1", "1"]);
    for row in &r {
        let (dagger, ddagger): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!(ddagger >= dagger);
    }
}

#[test]
fn mean_figure_labels_the_infinite_level_column_as_a_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "reproduce", "fig-mean", "--out-dir", dir.path().to_str().unwrap(), "--resolution", "0.1", "--gridsize", "50",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig-mean.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains("r_inf=lp-lower-bound gridsize=50"));
    assert!(lines.next().unwrap().split(',').any(|h| h == "r_inf_lower_bound"));
    for row in rows(&csv) {
        let r: Vec<f64> = row[1..5].iter().map(|x| x.parse().unwrap()).collect();
        assert!(r[1] >= r[0] - 1e-12, "{row:?}");
    }
}
