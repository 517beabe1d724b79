//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

fn polycone(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polycone"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn project_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = polycone(&["project", "--norm", "l2", "--target", "sin_2pi", "--dim", "2", "--n", "11", "--width", "2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["solution.csv", "solution.json", "run.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 121);
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(run["solution"]["status"], "optimal");
}

#[test]
fn solve_writes_gradient_products() {
    let dir = tempfile::tempdir().unwrap();
    let o = polycone(&["solve", "--kind", "monopolist_variant", "--n", "9"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["gradient.csv", "histogram.json", "contours.json"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("analytic_linf_error="));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["solve", "--kind", "monopolist", "--n", "9", "--c", "0.5"];
    assert_eq!(code(&polycone(&args, a.path())), 0);
    assert_eq!(code(&polycone(&args, b.path())), 0);
    for f in ["solution.csv", "solution.json", "gradient.csv", "histogram.json", "contours.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn step1d_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = polycone(&["solve", "--kind", "step1d", "--n", "201"], dir.path());
    assert_eq!(code(&o), 0);
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert!(run["analytic_linf_error"].as_f64().unwrap() <= 5e-3);
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&polycone(&["project", "--norm", "l7", "--target", "bump"], dir.path())), 1);
    assert_eq!(code(&polycone(&["project", "--target", "no_such_target"], dir.path())), 1);
    assert_eq!(code(&polycone(&["frobnicate"], dir.path())), 1);
}

#[test]
fn iteration_limit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = polycone(&["solve", "--kind", "monopolist", "--n", "15", "--max-iter", "3", "--no-polish"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("status=max_iter"));
}

#[test]
fn certification_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--n", "17", "--bounds", "-1,1", "--tolerance", "0"];
    let xy = [&["certify", "--target", "xy"][..], &grid].concat();
    assert_eq!(code(&polycone(&xy, dir.path())), 3);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certificate.json")).unwrap()).unwrap();
    assert_eq!(report["feasible"], false);
    assert!(!report["violations"].as_array().unwrap().is_empty());

    let axes = [&["certify", "--target", "xy", "--axes"][..], &grid].concat();
    assert_eq!(code(&polycone(&axes, dir.path())), 0);
    let abs = [&["certify", "--target", "abs_x_minus_3y", "--width", "3"][..], &grid].concat();
    assert_eq!(code(&polycone(&abs, dir.path())), 0);
}

#[test]
fn bench_without_timing_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["bench", "--ns", "4,8", "--no-timing"];
    assert_eq!(code(&polycone(&args, a.path())), 0);
    assert_eq!(code(&polycone(&args, b.path())), 0);
    for f in ["bench.md", "bench.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}
