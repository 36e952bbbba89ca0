use std::path::PathBuf;
use std::process::{Command, Output};

fn ari(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ari")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn normalize_prints_normal_form() {
    let o = ari(&["normalize", "2*b*3*a*5*b + 5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "5 + 30*a*b^2\n");
}

#[test]
fn normalize_trace_lists_stages() {
    let o = ari(&["normalize", "--trace", "x*1"]);
    let out = stdout(&o);
    assert!(out.contains("# Norm") && out.contains("# Clean"));
    assert!(out.contains("step 1:"));
    assert!(out.ends_with("x\n"));
}

#[test]
fn equal_and_not_equal() {
    let o = ari(&["equal", "2*(a+b)", "2*a+2*b"]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "equal\n".into()));
    let o = ari(&["equal", "(a+b)/(a+b)", "1"]);
    assert_eq!((o.status.code(), stdout(&o)), (Some(0), "not equal\n".into()));
}

#[test]
fn analyze_simp() {
    let o = ari(&["analyze", "--system", "simp"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4/4 oriented"));
}

#[test]
fn analyze_user_rule_file_and_obligations() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("f.rules");
    std::fs::write(&rules, "vars: x; bgvars: a\nF1: sin(x) + [0] -> sin(x)\n").unwrap();
    let report = dir.path().join("r.json");
    let o = ari(&["analyze", "--system", rules.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("F1"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["total"], 1);

    let obl = dir.path().join("obl");
    let o = ari(&["analyze", "--system", "canon", "--emit-obligations", obl.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(obl.join("A1.9.3.smt2").exists());
}

#[test]
fn bad_rule_file_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("bad.rules");
    std::fs::write(&rules, "vars: x\nR1: x -> x\nR2: x ->\n").unwrap();
    let o = ari(&["analyze", "--system", rules.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.rules") && err.contains("line 3"), "{err}");
}

#[test]
fn grade_exit_codes_follow_fails() {
    let (corpus, scheme) = (fixture("q26_corpus.jsonl"), fixture("q26_scheme.json"));
    let o = ari(&["grade", "--corpus", &corpus, "--scheme", &scheme]);
    assert_eq!(o.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("q26.json");
    let o = ari(&["grade", "--tprime", "--corpus", &corpus, "--scheme", &scheme, "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["fails"], 0);
    assert_eq!(json["records"], 10);
}

#[test]
fn grade_smt_without_solver_emits_only() {
    let o = ari(&["grade-smt", "--corpus", &fixture("q25_corpus.jsonl"), "--scheme", &fixture("q25_scheme.json")]);
    assert!(stdout(&o).contains("emission only"));
    let o = ari(&[
        "grade-smt",
        "--corpus",
        &fixture("q25_corpus.jsonl"),
        "--scheme",
        &fixture("q25_scheme.json"),
        "--solver",
        "no-such-solver-xyz {file}",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[cfg(unix)]
#[test]
fn grade_smt_with_scripted_solver() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("solver.sh");
    std::fs::write(&script, "#!/bin/sh\necho unknown\n").unwrap();
    let cmd = format!("sh {} {{file}}", script.display());
    let o = ari(&[
        "grade-smt",
        "--axioms",
        "reduced",
        "--corpus",
        &fixture("q25_corpus.jsonl"),
        "--scheme",
        &fixture("q25_scheme.json"),
        "--solver",
        &cmd,
        "--timeout-sec",
        "5",
    ]);
    let out = stdout(&o);
    assert!(out.contains("axioms reduced") && out.contains("unknown"), "{out}");
}

#[test]
fn confluence_simp_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("c.json");
    let o = ari(&["confluence", "--system", "simp", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 not joined"));
    assert!(report.exists());
}

#[test]
fn usage_errors() {
    assert_eq!(ari(&[]).status.code(), Some(2));
    assert_eq!(ari(&["normalize", "2*("]).status.code(), Some(2));
    assert_eq!(ari(&["analyze", "--system", "simp", "--tprime"]).status.code(), Some(2));
    assert_eq!(ari(&["grade-smt", "--axioms", "huge", "--corpus", "a", "--scheme", "b"]).status.code(), Some(2));
    assert_eq!(ari(&["grade", "--corpus", "missing.jsonl", "--scheme", "missing.json"]).status.code(), Some(2));
    assert_eq!(ari(&["--help"]).status.code(), Some(0));
}
