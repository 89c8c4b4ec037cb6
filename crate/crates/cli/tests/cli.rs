use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spiked"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spiked-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn config(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn quartic(name: &str, a: f64) -> PathBuf {
    config(name, &format!(r#"{{"potential": [{{"q": 2, "A": 1}}, {{"q": "-4", "A": {a}}}], "L": 0}}"#))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(path: &PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_reports_certified_energy() {
    let cfg = quartic("solve.json", 0.1);
    let json = scratch("solve-report.json");
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--bracket", "3.5", "3.7", "--json", json.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&json);
    let ev = &r["eigenvalues"][0];
    let e = ev["energy"].as_f64().unwrap();
    assert!((e - 3.5755519912).abs() < 1e-9);
    // the value carries no digits beyond the certified ones
    let digits = ev["certified_digits"].as_u64().unwrap() as usize;
    assert!(digits >= 10);
    assert_eq!(e, format!("{:.*e}", digits - 1, e).parse::<f64>().unwrap());
    assert_eq!(ev["connection"].as_object().unwrap().len(), 8);
    assert!(ev["certificates"].as_array().unwrap().len() >= 4);
    assert!(r.get("seconds").is_none());
}

#[test]
fn solve_with_oracle_and_wavefunction() {
    let cfg = quartic("oracle.json", 0.4);
    let csv = scratch("wf.csv");
    let json = scratch("oracle-report.json");
    let out = run(&[
        "solve", "--config", cfg.to_str().unwrap(), "--bracket", "3.9", "4.2", "--oracle",
        "--wavefunction", csv.to_str().unwrap(), "--grid", "50", "--json", json.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ev = &report(&json)["eigenvalues"][0];
    assert!(ev["oracle"]["delta"].as_f64().unwrap() < 1e-6);
    assert_eq!(ev["oracle"]["nodes"], 0);
    assert_eq!(ev["wavefunction"]["nodes"], 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,Re_R,Im_R"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn bracket_from_config() {
    let cfg = config(
        "bracket.json",
        r#"{"potential": [{"q": 2, "A": 1}, {"q": "-5/2", "A": 0.005}], "solver": {"energy_bracket": [2.95, 3.1]}}"#,
    );
    let json = scratch("bracket-report.json");
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let e = report(&json)["eigenvalues"][0]["energy"].as_f64().unwrap();
    assert!((e - 3.01914010728).abs() < 1e-8 * e);
}

#[test]
fn input_errors_exit_with_two() {
    let bad = config("bad.json", r#"{"potential": [{"q": 2, "A": 1}"#);
    let out = run(&["solve", "--config", bad.to_str().unwrap(), "--bracket", "3", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error"));

    let unknown = config("unknown.json", r#"{"potential": [{"q": 2, "A": 1}, {"q": -4, "A": 1}], "spin": 1}"#);
    assert_eq!(run(&["solve", "--config", unknown.to_str().unwrap(), "--bracket", "3", "4"]).status.code(), Some(2));

    let regular = config("regular.json", r#"{"potential": [{"q": 2, "A": 1}, {"q": -1, "A": 1}]}"#);
    let out = run(&["solve", "--config", regular.to_str().unwrap(), "--bracket", "3", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a spiked oscillator"));

    let missing = scratch("missing.json");
    assert_eq!(run(&["solve", "--config", missing.to_str().unwrap(), "--bracket", "3", "4"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "12"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_with_one() {
    let cfg = quartic("nosign.json", 0.4);
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--bracket", "4.2", "4.3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no sign change"));
}

#[test]
fn scan_finds_the_ground_state_deterministically() {
    let cfg = quartic("scan.json", 0.4);
    let reports: Vec<String> = ["1", "4"]
        .iter()
        .map(|t| {
            let json = scratch(&format!("scan-{t}.json"));
            let out = run(&["scan", "--config", cfg.to_str().unwrap(), "--scan", "3", "9", "0.1", "--threads", t, "--json", json.to_str().unwrap()]);
            assert!(out.status.success());
            std::fs::read_to_string(json).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    let r: Value = serde_json::from_str(&reports[0]).unwrap();
    let first = &r["brackets"][0];
    assert!(first[0].as_f64().unwrap() < 4.0319714400 && 4.0319714400 < first[1].as_f64().unwrap());
}

#[test]
fn empty_scan_succeeds() {
    let cfg = quartic("empty.json", 0.4);
    let json = scratch("empty-report.json");
    let out = run(&["scan", "--config", cfg.to_str().unwrap(), "--scan", "5", "5", "0.1", "--json", json.to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(&json);
    assert!(r["brackets"].as_array().unwrap().is_empty());
    assert!(r["scan"].as_array().unwrap().is_empty());
}

#[test]
fn degenerate_indices_are_explained() {
    // a coupling within 1e-13 of the merger of the two indices
    let cfg = quartic("critical.json", 0.130536181738);
    let out = run(&["solve", "--config", cfg.to_str().unwrap(), "--bracket", "3.55", "3.75"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("degenerate") && err.contains("the value 0.5 for"), "{err}");
}

#[test]
fn reproduce_tables() {
    for (t, probe) in [("8", "A-6=0.05 A-4=0 E"), ("9", "lambda=0.005 nu1"), ("4", "sign pattern m=3")] {
        let json = scratch(&format!("table{t}.json"));
        let out = run(&["reproduce", t, "--json", json.to_str().unwrap()]);
        assert!(out.status.success(), "table {t}: {}", String::from_utf8_lossy(&out.stdout));
        let r = report(&json);
        let rows = r["table"]["rows"].as_array().unwrap();
        let row = rows.iter().find(|r| r["label"] == probe).unwrap_or_else(|| panic!("{probe}"));
        assert_eq!(row["pass"], true);
    }
    assert!(run(&["reproduce", "--table", "2"]).status.success());
}
