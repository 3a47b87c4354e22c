//! End-to-end tests of the command-line interface: exit codes, exact
//! output values, and byte-determinism of the machine-readable format.

use std::process::{Command, Output};

fn superint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn bracket_follows_the_fixed_convention() {
    let out = superint(&["bracket", "x", "p1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "1");

    let out = superint(&["bracket", "p1", "x"]);
    assert_eq!(stdout(&out).trim(), "-1");

    // Rotational invariance of the kinetic term.
    let out = superint(&["bracket", "x*p2 - y*p1", "1/2*p1^2 + 1/2*p2^2"]);
    assert_eq!(stdout(&out).trim(), "0");
}

#[test]
fn bracket_with_symbol_substitution() {
    let out = superint(&["bracket", "alpha*x*p2", "p1", "--alpha", "3/2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "3/2*p2");

    let out = superint(&[
        "detsolve",
        "--order",
        "3",
        "--potential",
        "alpha*y*x^(-2/3)",
        "--hbar",
        "0",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("A003=2 A021=3"), "{}", stdout(&out));
}

#[test]
fn commutator_of_quantized_atoms() {
    let out = superint(&["commutator", "p1", "x"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("normal-ordered: -i*hbar"), "{text}");
}

#[test]
fn detsolve_order2_finds_the_h_direction() {
    let out = superint(&[
        "detsolve",
        "--order",
        "2",
        "--potential",
        "alpha*y*x^(-2/3)",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("dimension 1"), "{text}");
    assert!(text.contains("A002=1 A020=1"), "{text}");
    assert!(text.contains("necessary condition only"), "{text}");
}

#[test]
fn verify_all_passes_and_json_is_deterministic() {
    let a = superint(&["verify-all", "--format", "json"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = superint(&["verify-all", "--format", "json"]);
    assert_eq!(
        a.stdout, b.stdout,
        "machine-readable output must be byte-stable"
    );
    assert!(!stdout(&a).contains("timing_millis"));

    let timed = superint(&["verify-all", "--format", "json", "--timings"]);
    assert!(stdout(&timed).contains("timing_millis"));
}

#[test]
fn drach_suite_runs() {
    let out = superint(&["drach", "--a", "0", "--b", "1", "--c", "1"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.contains("contains the H^2 direction"), "{text}");
}

#[test]
fn simulate_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = superint(&[
        "simulate",
        "--tend",
        "0.1",
        "--dt",
        "1e-3",
        "--stride",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x,y,p1,p2,H,X,Y");
    assert!(lines.clone().count() >= 10);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("max relative drift"), "{stderr}");
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let out = superint(&["bracket", "x +", "p1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("syntax error"), "{err}");

    let out = superint(&["verify-all", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));

    let out = superint(&["detsolve", "--order", "7", "--potential", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn drift_tolerance_override() {
    // An absurdly tight tolerance trips the drift check.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = superint(&[
        "simulate",
        "--tend",
        "1.0",
        "--dt",
        "1e-2",
        "--drift-tol",
        "1e-30",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("failed check: drift."), "{err}");
}
