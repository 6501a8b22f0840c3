use std::process::{Command, Output};

use agnostic_dolinar::figures::{sha256_hex, RunManifest};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agnostic-dolinar")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn invalid_arguments_exit_with_two() {
    let cases: [&[&str]; 7] = [
        &["fig2", "--alpha", "-0.5"],
        &["fig2", "--alpha", "0.5", "--alpha-sq", "0.25"],
        &["fig4", "--estimator", "homodyne"],
        &["fig5", "--n", "1"],
        &["fig6", "--sigma", "0"],
        &["fig3", "--format", "json"],
        &["fig7"],
    ];
    for args in cases {
        let out = cli(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(code(&cli(&["--help"])), 0);
}

#[test]
fn figure_to_stdout_is_csv() {
    let out = cli(&["fig3", "--alpha", "0.25,1", "--n", "1,4"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# fig3 columns=alpha|n|pe_eande|pe_helstrom"));
    assert_eq!(lines.next().unwrap(), "alpha,n,pe_eande,pe_helstrom");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r[2] >= r[3] && r[2] <= 0.5);
    }
}

#[test]
fn alpha_sq_matches_alpha() {
    let a = cli(&["fig2", "--alpha", "0.5", "--n", "3"]);
    let b = cli(&["fig2", "--alpha-sq", "0.25", "--n", "3"]);
    assert_eq!(code(&a), 0);
    let data = |o: &Output| String::from_utf8_lossy(&o.stdout).lines().skip(2).map(str::to_owned).collect::<Vec<_>>();
    assert_eq!(data(&a), data(&b));
}

#[test]
fn out_writes_manifest_with_hash() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let out = cli(&["fig2", "--alpha", "0.625", "--n", "1,2", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(&path).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(RunManifest::path_for(&path)).unwrap()).unwrap();
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    assert_eq!(manifest["outputs"][0]["bytes"].as_u64().unwrap(), bytes.len() as u64);
}

#[test]
fn paper_literal_changes_only_the_bound() {
    let base = cli(&["fig2", "--alpha", "0.625", "--n", "4"]);
    let lit = cli(&["fig2", "--alpha", "0.625", "--n", "4", "--paper-literal"]);
    assert_eq!(code(&lit), 0);
    let row = |o: &Output| -> Vec<f64> {
        String::from_utf8_lossy(&o.stdout).lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect()
    };
    let (b, l) = (row(&base), row(&lit));
    assert_eq!(b[2], l[2]);
    assert_ne!(b[3], l[3]);
}

#[test]
fn verify_passes_and_reports_each_check() {
    let out = cli(&["verify", "--trials", "20000", "--slices", "500", "--seed", "11", "--grid-steps", "200"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("  PASS  ")).count(), 9);
}
