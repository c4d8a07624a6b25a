use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn pretlab(args: &[&str]) -> Output {
    pretlab_env(args, &[])
}

fn pretlab_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pretlab"));
    cmd.args(args).env_remove("PRETLAB_SIEVE_LIMIT");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

fn re(v: &Value) -> f64 {
    v[0].as_f64().unwrap()
}

#[test]
fn squarefree_pairs_correlation() {
    let v = json(&pretlab(&["correlate", "--f", "mobius_sq", "--P", "x", "--Q", "x+1", "--x", "200000"]));
    assert_eq!(v["tool"], "pretlab");
    assert_eq!(v["config"]["command"], "correlate");
    let pred = re(&v["result"]["prediction"]);
    let direct = re(&v["result"]["direct"]);
    assert!((pred - 0.3226).abs() < 0.01, "{pred}");
    assert!((pred - direct).abs() < 0.01, "{pred} vs {direct}");
    assert!(v["timing"]["elapsed_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn period_two_characterization() {
    let v = json(&pretlab(&["ect", "--f", "override(one; 2:* => -1)", "--x", "10000"]));
    let verdict = &v["result"]["verdict"];
    assert_eq!(verdict["status"], "Satisfied");
    assert_eq!(verdict["period_m"], 2);
    assert_eq!(v["result"]["discrepancy"].as_f64(), Some(1.0));
}

#[test]
fn root_count_of_x_squared_plus_one() {
    let v = json(&pretlab(&["omega", "--P", "x^2+1", "--p", "5", "--k", "2", "--list"]));
    assert_eq!(v["result"]["omega"], 2);
    assert_eq!(v["result"]["roots"], serde_json::json!([7, 18]));
}

#[test]
fn small_sieve_limit_is_a_precondition_failure() {
    let out = pretlab_env(&["correlate", "--f", "mobius_sq", "--x", "100000"], &[("PRETLAB_SIEVE_LIMIT", "1000")]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let out = pretlab_env(&["selftest"], &[("PRETLAB_SIEVE_LIMIT", "1000")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn proportional_forms_are_rejected() {
    let out = pretlab(&["multi", "--term", "mobius_sq | 1 | 0", "--term", "mobius_sq | 1 | 0", "--x", "1000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn malformed_spec_is_an_error() {
    let out = pretlab(&["meanvalue", "--f", "override(one; 4:1 => 1)", "--x", "1000"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not prime"));
}

#[test]
fn selftest_passes_and_detects_an_injected_fault() {
    let v = json(&pretlab(&["selftest"]));
    let checks = v["result"]["checks"].as_array().unwrap();
    assert!(checks.len() >= 10);
    assert!(checks.iter().all(|c| c["passed"] == true), "{checks:?}");
    let out = pretlab(&["selftest", "--inject-fault", "g-sign"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("G(2a)=-4G(a)"), "{stderr}");
    assert_eq!(stderr.lines().filter(|l| l.starts_with("FAIL")).count(), 1, "{stderr}");
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let args = ["correlate", "--f", "override(liouville; 2:* => -1)", "--g", "mobius_sq", "--x", "100000"];
    let one = without_timing(json(&pretlab(&[&["--threads", "1"][..], &args].concat())));
    let eight = without_timing(json(&pretlab(&[&["--threads", "8"][..], &args].concat())));
    let seq = without_timing(json(&pretlab(&[&["--sequential"][..], &args].concat())));
    assert_eq!(one, eight);
    assert_eq!(one, seq);
}

#[test]
fn reports_can_be_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let path_str = path.to_str().unwrap();
    let out = pretlab(&["--output", path_str, "brudern", "--a", "mobius_sq", "--n", "5000"]);
    assert!(out.status.success());
    let first: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let second = json(&pretlab(&["rerun", path_str]));
    assert_eq!(without_timing(first.clone()), without_timing(second));
    let direct = first["result"]["r_direct"].as_u64().unwrap();
    let brute = (1..5000u64).filter(|&m| squarefree(m) && squarefree(5000 - m)).count() as u64;
    assert_eq!(direct, brute);
}

fn squarefree(n: u64) -> bool {
    (2..).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0)
}

#[test]
fn csv_rows_follow_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = pretlab(&["--format", "csv", "--output", path.to_str().unwrap(), "correlate", "--f", "mobius_sq", "--x", "10000"]);
    assert!(out.status.success());
    assert!(Path::new(&path).exists());
    let mut reader = csv::Reader::from_path(&path).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["section", "key", "p", "re", "im"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let factor_2 = rows.iter().find(|r| &r[0] == "factor" && &r[2] == "2").expect("factor at 2");
    assert_eq!(factor_2[3].parse::<f64>().unwrap(), 0.5);
    let pred = rows.iter().find(|r| &r[0] == "summary" && &r[1] == "prediction").expect("prediction row");
    assert!((pred[3].parse::<f64>().unwrap() - 0.3226).abs() < 0.01);
    // factors first, then the summary
    let first_summary = rows.iter().position(|r| &r[0] == "summary").unwrap();
    assert!(rows[first_summary..].iter().all(|r| &r[0] == "summary"));
}
