mod common;

use std::path::Path;
use std::process::Command;

use cogniview::cli::{run_with_config, EXIT_ERROR, EXIT_NOT_EQUIVALENT, EXIT_OK, EXIT_USAGE};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str], env_config: Option<&Path>) -> Run {
    let argv: Vec<String> = std::iter::once("cogniview").chain(args.iter().copied()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with_config(&argv, env_config, &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn metrics_json_on_clean_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ok.mpy", "pass\n");
    let r = run(&["metrics", &f, "--json"], None);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.contains("\"composite_score\": 0"), "{}", r.out);
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(v["composite_score"], 0);
}

#[test]
fn missing_file_is_an_error() {
    let r = run(&["metrics", "/nonexistent/missing.mpy"], None);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.err.starts_with("error: "), "{}", r.err);
}

#[test]
fn syntax_errors_carry_location() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.mpy", "x = 1\ny = (2\n");
    let r = run(&["metrics", &f], None);
    assert_eq!(r.code, EXIT_ERROR);
    let line = r.err.lines().next().unwrap();
    assert!(line.starts_with("error: UnexpectedToken: "), "{line}");
    assert!(line.contains(&format!(" at {f}:")), "{line}");
}

#[test]
fn bad_usage_exits_three() {
    assert_eq!(run(&["frobnicate"], None).code, EXIT_USAGE);
    assert_eq!(run(&["metrics"], None).code, EXIT_USAGE);
    assert_eq!(run(&["metrics", "x.mpy", "--capacity", "lots"], None).code, EXIT_USAGE);
}

#[test]
fn invalid_config_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ok.mpy", "pass\n");
    assert_eq!(run(&["metrics", &f, "--capacity", "0"], None).code, EXIT_USAGE);
    let cfg = write(dir.path(), "cfg.json", "{\"bogus\": 1}");
    assert_eq!(run(&["metrics", &f], Some(Path::new(&cfg))).code, EXIT_USAGE);
}

#[test]
fn view_writes_view_map_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(common::corpus_dir().join("guard_sign.mpy")).unwrap();
    let f = write(dir.path(), "nested.mpy", &src);
    let out = dir.path().join("out.mpy");
    let r = run(&["view", &f, "-o", out.to_str().unwrap()], None);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let view = std::fs::read_to_string(&out).unwrap();
    assert!(view.contains("if not a > 0:"));
    let map: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.map.json")).unwrap()).unwrap();
    assert_eq!(map.as_array().unwrap().len(), view.lines().count());
    assert_eq!(map[0]["view_line"], 1);
    let trace: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out.trace.json")).unwrap()).unwrap();
    assert_eq!(trace[0]["kind"], "GuardClause");
    assert_eq!(trace[0]["status"], "applied");
}

#[test]
fn view_defaults_to_sibling_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "prog.mpy", "result = alpha * beta + gamma * delta + epsilon\n");
    assert_eq!(run(&["view", &f], None).code, EXIT_OK);
    assert!(dir.path().join("prog.view.mpy").exists());
    assert!(dir.path().join("prog.view.map.json").exists());
    assert!(dir.path().join("prog.view.trace.json").exists());
}

#[test]
fn no_check_sees_the_same_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(common::corpus_dir().join("guard_grade.mpy")).unwrap();
    let f = write(dir.path(), "g.mpy", &src);
    let a = dir.path().join("a.mpy");
    let b = dir.path().join("b.mpy");
    assert_eq!(run(&["view", &f, "-o", a.to_str().unwrap()], None).code, EXIT_OK);
    assert_eq!(run(&["view", &f, "-o", b.to_str().unwrap(), "--no-check"], None).code, EXIT_OK);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.trace.json")).unwrap(),
        std::fs::read(dir.path().join("b.trace.json")).unwrap()
    );
}

#[test]
fn check_reports_differences() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.mpy", "def f(x):\n    return x + 1\n");
    let b = write(dir.path(), "b.mpy", "def f(x):\n    return x + 2\n");
    let same = run(&["check", &a, &a], None);
    assert_eq!(same.code, EXIT_OK);
    let diff = run(&["check", &a, &b, "--trials", "10"], None);
    assert_eq!(diff.code, EXIT_NOT_EQUIVALENT);
    let v: serde_json::Value = serde_json::from_str(&diff.out).unwrap();
    assert_eq!(v["equivalent"], false);
    assert_eq!(v["counterexample"]["function"], "f");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ok.mpy", "pass\n");
    let cfg = write(dir.path(), "cfg.json", "{\"capacity\": 7, \"line_limit\": 30}");
    let from_env = run(&["metrics", &f, "--json"], Some(Path::new(&cfg)));
    let v: serde_json::Value = serde_json::from_str(&from_env.out).unwrap();
    assert_eq!((v["capacity"].as_u64(), v["line_limit"].as_u64()), (Some(7), Some(30)));
    let flagged = run(&["metrics", &f, "--json", "--capacity", "3"], Some(Path::new(&cfg)));
    let v: serde_json::Value = serde_json::from_str(&flagged.out).unwrap();
    assert_eq!((v["capacity"].as_u64(), v["line_limit"].as_u64()), (Some(3), Some(30)));
    let defaults = run(&["metrics", &f, "--json"], None);
    let v: serde_json::Value = serde_json::from_str(&defaults.out).unwrap();
    assert_eq!((v["capacity"].as_u64(), v["line_limit"].as_u64()), (Some(5), Some(40)));
}

#[test]
fn corpus_report_rows_are_sorted_and_aggregates_recompute() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let r = run(&["corpus", common::corpus_dir().to_str().unwrap(), "--report", report.to_str().unwrap()], None);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let rows = v["files"].as_array().unwrap();
    let paths: Vec<&str> = rows.iter().map(|r| r["path"].as_str().unwrap()).collect();
    let mut sorted = paths.clone();
    sorted.sort();
    assert_eq!(paths, sorted);
    let pairs: Vec<(f64, f64)> =
        rows.iter().map(|r| (r["score_before"].as_f64().unwrap(), r["score_after"].as_f64().unwrap())).collect();
    let mean = pairs.iter().map(|(b, a)| b - a).sum::<f64>() / pairs.len() as f64;
    assert_eq!(v["aggregates"]["file_count"].as_u64(), Some(pairs.len() as u64));
    assert!((v["aggregates"]["mean_score_reduction"].as_f64().unwrap() - mean).abs() < 1e-12);
    let zero = pairs.iter().filter(|(_, a)| *a == 0.0).count() as f64 * 100.0 / pairs.len() as f64;
    assert!((v["aggregates"]["percent_zero_after"].as_f64().unwrap() - zero).abs() < 1e-12);
}

#[test]
fn binary_honors_config_env() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ok.mpy", "pass\n");
    let cfg = write(dir.path(), "cfg.json", "{\"capacity\": 4}");
    let out = Command::new(env!("CARGO_BIN_EXE_cogniview"))
        .args(["metrics", &f, "--json"])
        .env("COGNIVIEW_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["capacity"], 4);

    let missing = Command::new(env!("CARGO_BIN_EXE_cogniview")).args(["metrics", "nope.mpy"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}
