use std::path::Path;
use std::process::{Command, Output};

fn medoid_lp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_medoid-lp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = medoid_lp(&["solve", "--no-such-flag"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = medoid_lp(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    for sub in [
        "solve",
        "exact",
        "certify",
        "sample",
        "experiment",
        "theorem-check",
        "export-lp",
    ] {
        assert!(String::from_utf8_lossy(&out.stdout).contains(sub), "{sub}");
    }

    let out = medoid_lp(
        &["theorem-check", "--R", "3.75", "--n", "1000000", "--k", "2", "--d", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["satisfied"], true);
}

#[test]
fn sample_solve_exact_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = medoid_lp(
        &[
            "sample", "--k", "2", "--n", "8", "--R", "4", "--seed", "3", "--out", "pts.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let out = medoid_lp(
        &["solve", "--points", "pts.csv", "--k", "2", "--metric", "sq"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let solved: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let out = medoid_lp(&["exact", "--points", "pts.csv", "--k", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let exact: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(solved["result"]["medoids"], exact["optimal_medoid_sets"][0]);
    let out = medoid_lp(
        &["export-lp", "--points", "pts.csv", "--k", "2", "--out", "relax.lp"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("relax.lp")).unwrap();
    assert!(text.contains("z_15_15"));
}

#[test]
fn experiment_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("grid.cfg"),
        "n = 4\nn = 6\nk = 2\nR = 2\nR = 3\nd = 2\ncase = 1\ncase = 2\ntrials = 3\nseed = 7\n",
    )
    .unwrap();
    let run = |out: &str| {
        let o = medoid_lp(&["experiment", "--config", "grid.cfg", "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("a");
    let o = Command::new(env!("CARGO_BIN_EXE_medoid-lp"))
        .args(["experiment", "--config", "grid.cfg", "--out", "b"])
        .env("MEDOID_LP_THREADS", "1")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    for f in [
        "cells.csv",
        "cells.json",
        "failed_ball_case1_d2_k2.svg",
        "failed_ball_case2_d2_k2.svg",
    ] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("a/cells.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
}
