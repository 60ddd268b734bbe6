//! Exit-code and output contract of the binary: 0 success, 1 strategy
//! failure, 2 usage/validation error.

use std::path::PathBuf;
use std::process::{Command, Output};

fn demo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

fn run(args: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_termstrat"));
    cmd.arg("apply");
    for (flag, value) in args {
        cmd.arg(flag).arg(value);
    }
    cmd.output().unwrap()
}

fn path(name: &str) -> String {
    demo().join(name).to_string_lossy().into_owned()
}

#[test]
fn tp_apply_prints_the_rewritten_term() {
    let out = run(&[
        ("--sig", &path("expr-sig.sexp")),
        ("--term", &path("expr-term.sexp")),
        ("--rules", &path("expr-rules.sexp")),
        ("--strategy", "full_td(rule negate_bool)"),
        ("--flavor", "tp"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "Just (Add (Add (Lit 1) (Flag false)) (Add (Lit 2) (Lit 3)))\n"
    );
}

#[test]
fn partial_failure_prints_nothing_and_exits_1() {
    let out = run(&[
        ("--sig", &path("path-sig.sexp")),
        ("--term", &path("term-nochain.sexp")),
        ("--rules", &path("path-rules.sexp")),
        ("--strategy", "belowlist([rule p1, rule p2], rule sortb2int)"),
        ("--flavor", "tu"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "Nothing\n");
}

#[test]
fn nondet_prints_one_result_per_line() {
    let out = run(&[
        ("--sig", &path("expr-sig.sexp")),
        ("--term", &path("expr-term.sexp")),
        ("--rules", &path("expr-rules.sexp")),
        ("--strategy", "once_td(adhoc(fail, swap))"),
        ("--flavor", "tp"),
        ("--effect", "nondet"),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    // one single-swap variant per Add node, preorder
    assert_eq!(stdout.lines().count(), 3);
    assert_eq!(
        stdout.lines().next().unwrap(),
        "(Add (Add (Lit 2) (Lit 3)) (Add (Lit 1) (Flag true)))"
    );
}

#[test]
fn validation_errors_exit_2() {
    // unknown rule in the strategy
    let out = run(&[
        ("--sig", &path("expr-sig.sexp")),
        ("--term", &path("expr-term.sexp")),
        ("--strategy", "once_td(rule nosuch)"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    // flavor mismatch is a static error
    let out = run(&[
        ("--sig", &path("expr-sig.sexp")),
        ("--term", &path("expr-term.sexp")),
        ("--rules", &path("expr-rules.sexp")),
        ("--strategy", "full_td(rule return_int)"),
        ("--flavor", "tp"),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // choice needs an effect with failure
    let out = run(&[
        ("--sig", &path("expr-sig.sexp")),
        ("--term", &path("expr-term.sexp")),
        ("--strategy", "choice(id, id)"),
        ("--flavor", "tp"),
        ("--effect", "total"),
    ]);
    assert_eq!(out.status.code(), Some(2));

    // ill-sorted term: (Lit true)
    let dir = std::env::temp_dir().join("termstrat-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad-term.sexp");
    std::fs::write(&bad, "(Lit true)").unwrap();
    let out = run(&[
        ("--sig", &path("expr-sig.sexp")),
        ("--term", &bad.to_string_lossy()),
        ("--strategy", "id"),
        ("--flavor", "tp"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_validates_without_running() {
    let out = Command::new(env!("CARGO_BIN_EXE_termstrat"))
        .arg("check")
        .args(["--sig", &path("expr-sig.sexp")])
        .args(["--term", &path("expr-term.sexp")])
        .args(["--rules", &path("expr-rules.sexp")])
        .args(["--strategy", "full_td(rule negate_bool)"])
        .args(["--flavor", "tp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn demo_suite_self_checks() {
    let out = Command::new(env!("CARGO_BIN_EXE_termstrat"))
        .arg("demo")
        .arg("--dir")
        .arg(demo())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.matches(": ok").count(), 7);
}
