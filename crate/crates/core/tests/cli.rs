use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

fn cmspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmspec")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn schema() -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn load_valid_report(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema()).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{}: {errors:?}", path.display());
    v
}

fn report_arg(dir: &Path, name: &str) -> (PathBuf, String) {
    let p = dir.join(name);
    let s = p.to_str().unwrap().to_string();
    (p, s)
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&cmspec(&["--help"])), 0);
    assert_eq!(code(&cmspec(&["--version"])), 0);
    assert_eq!(code(&cmspec(&["verify", "--help"])), 0);
}

#[test]
fn invalid_configs_are_usage_errors() {
    let cases: &[&[&str]] = &[
        &[],
        &["frobnicate"],
        &["verify", "--trials", "2"],
        &["verify", "--precision-bits", "32"],
        &["selftest", "--context", "3,1"],
        &["selftest", "--context", "0.5,1"],
        &["selftest", "--context", "1"],
        &["verify", "--check", "nonsense"],
        &["verify", "--system", "b2", "--check", "cubic"],
        &["derive", "--system", "a2", "--target", "B1"],
        &["derive", "--target", "C7"],
        &["verify", "--threads", "0"],
        &["verify", "--system", "c3"],
        &["cache", "check"],
    ];
    for args in cases {
        let out = cmspec(args);
        assert_eq!(code(&out), 64, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn selftest_passes_at_default_and_low_precision() {
    let dir = tempdir().unwrap();
    let (path, arg) = report_arg(dir.path(), "selftest.json");
    let out = cmspec(&["selftest", "--report", &arg]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v = load_valid_report(&path);
    assert!(v["selftest"].as_array().unwrap().iter().all(|r| r["passed"] == true));
    let out = cmspec(&["selftest", "--precision-bits", "64"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("ODE residual"));
}

#[test]
fn a2_commutator_reports_are_deterministic_across_threads() {
    let dir = tempdir().unwrap();
    let mut reports = Vec::new();
    for (name, threads) in [("a.json", "1"), ("b.json", "1"), ("c.json", "4")] {
        let (path, arg) = report_arg(dir.path(), name);
        let out = cmspec(&["verify", "--system", "a2", "--check", "commutators", "--threads", threads, "--report", &arg]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        reports.push((fs::read(&path).unwrap(), load_valid_report(&path)));
    }
    assert_eq!(reports[0].0, reports[1].0);
    assert_eq!(reports[0].1["reports"], reports[2].1["reports"]);
    let rs = reports[0].1["reports"].as_array().unwrap();
    assert_eq!(rs.len(), 15);
    assert_eq!(rs[0]["subject"], "[L1, L2]");
    assert_eq!(rs[0]["structural_zero"], true);
}

#[test]
fn a2_cubic_runs_for_every_pair_integral() {
    let dir = tempdir().unwrap();
    let (path, arg) = report_arg(dir.path(), "cubic.json");
    let out = cmspec(&["verify", "--system", "a2", "--check", "cubic", "--report", &arg]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let v = load_valid_report(&path);
    let subjects: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["subject"].as_str().unwrap()).collect();
    assert_eq!(subjects.len(), 3);
    for (s, pair) in subjects.iter().zip(["I12", "I23", "I31"]) {
        assert!(s.ends_with(&format!("I = {pair}")), "{s}");
    }
}

#[test]
fn b2_quartic_is_deterministic_and_cache_neutral() {
    let dir = tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cache = cache.to_str().unwrap();
    let (cold, cold_arg) = report_arg(dir.path(), "cold.json");
    let (warm, warm_arg) = report_arg(dir.path(), "warm.json");
    let args = ["verify", "--system", "b2", "--check", "quartic", "--trials", "5", "--seed", "7", "--cache-dir", cache];
    let out = cmspec(&[&args[..], &["--report", &cold_arg]].concat());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let out = cmspec(&[&args[..], &["--report", &warm_arg]].concat());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Hit"));
    assert_eq!(fs::read(&cold).unwrap(), fs::read(&warm).unwrap());
    let v = load_valid_report(&warm);
    assert_eq!(v["reports"][0]["trials"], 5);
    assert_eq!(v["reports"][0]["seed"], 7);
}

#[test]
fn derive_a1_matches_the_printed_formula() {
    let out = cmspec(&["derive", "--system", "a2", "--target", "A1"]);
    assert_eq!(code(&out), 0);
    let s = stdout(&out);
    assert!(s.contains("A1 (a2) = -1/4 L2^4 - 3/2 L1 L2^2 - 9/4 L1^2 + 6 g2"), "{s}");
    assert!(s.contains("diff vs printed: empty"));
}

#[test]
fn derive_b2_isolates_the_weight_26_term() {
    let dir = tempdir().unwrap();
    let (path, arg) = report_arg(dir.path(), "b2.json");
    let out = cmspec(&["derive", "--target", "B2", "--report", &arg]);
    assert_eq!(code(&out), 3, "{}", stdout(&out));
    let v = load_valid_report(&path);
    let d = &v["derivations"][0];
    assert_eq!(d["weight"], 20);
    let monomials: Vec<&str> = d["diff"].as_array().unwrap().iter().map(|t| t["monomial"].as_str().unwrap()).collect();
    assert_eq!(monomials, ["M g2 g3^2", "M g2 g3^3", "L^2 g2 g3^2", "L^2 g2 g3^3"]);
}

#[test]
fn cache_lifecycle() {
    let dir = tempdir().unwrap();
    let cache_dir = dir.path().join("cache");
    let c = cache_dir.to_str().unwrap();
    assert_eq!(code(&cmspec(&["cache", "warm", "--system", "b2", "--cache-dir", c])), 0);
    let out = cmspec(&["cache", "check", "--cache-dir", c]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("3 entries, 0 corrupt"), "{}", stdout(&out));

    let entry = fs::read_dir(&cache_dir).unwrap().next().unwrap().unwrap().path();
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&entry).unwrap()).unwrap();
    let payload = v["payload"].as_str().unwrap().replacen('1', "7", 1);
    v["payload"] = Value::String(payload);
    fs::write(&entry, v.to_string()).unwrap();
    assert_eq!(code(&cmspec(&["cache", "check", "--cache-dir", c])), 1);

    let out = cmspec(&["derive", "--target", "B1", "--cache-dir", c]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Recomputed"));
    assert_eq!(code(&cmspec(&["cache", "check", "--cache-dir", c])), 0);

    let out = cmspec(&["cache", "clear", "--cache-dir", c]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("removed 3"));
}
