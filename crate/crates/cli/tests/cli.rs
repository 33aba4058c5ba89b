use std::path::Path;
use std::process::{Command, Output};

fn fockzero(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockzero"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("FOCKZERO_THREADS")
        .output()
        .expect("run fockzero")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn eval_sigma_at_origin_is_a_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = fockzero(dir.path(), &["eval", "sigma", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("eval_sigma.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][5], "true");
}

#[test]
fn eval_psi_at_minus_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = fockzero(dir.path(), &["eval", "psi", "-1,0", "--R", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("eval_psi.csv"));
    let v: f64 = rows[0][2].parse().unwrap();
    assert!((v - (2.0f64 / 3.0).ln()).abs() < 1e-6);
}

#[test]
fn eval_modified_is_finite_at_one_and_flags_poles() {
    let dir = tempfile::tempdir().unwrap();
    let o = fockzero(dir.path(), &["eval", "modified", "1,0", "2,0", "--R", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("eval_modified.csv"));
    assert!(rows[0][2].parse::<f64>().unwrap().is_finite());
    assert_eq!(rows[1][5], "true");

    let o = fockzero(dir.path(), &["eval", "psi", "3,0", "-2.5,-1", "--R", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("eval_psi.csv"));
    assert_eq!(rows[0][6], "domain_pole");
    assert_eq!(rows[1][6], "ok");
}

#[test]
fn parse_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fockzero(dir.path(), &["eval", "sigma", "1;2"]).status.code(), Some(2));
    assert_eq!(fockzero(dir.path(), &["eval", "sigma", "1,x"]).status.code(), Some(2));
    assert_eq!(fockzero(dir.path(), &["norm", "--p", "two"]).status.code(), Some(2));
}

#[test]
fn zero_shift_is_rejected_naming_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let o = fockzero(dir.path(), &["verify", "--R", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r_shift > 0"));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# test\nR = 1\nalpha = 3.141592653589793\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    // R = 1 from the file: 2 is a zero of the modified product
    let o = fockzero(dir.path(), &["eval", "modified", "2,0", "--config", cfg_s]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&dir.path().join("eval_modified.csv"))[0][5], "true");
    // the flag overrides it: 2 is not in Λ_0.5
    let o = fockzero(dir.path(), &["eval", "modified", "2,0", "--config", cfg_s, "--R", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(csv_rows(&dir.path().join("eval_modified.csv"))[0][5], "false");

    std::fs::write(&cfg, "shape = round\n").unwrap();
    assert_eq!(fockzero(dir.path(), &["eval", "sigma", "1,1", "--config", cfg_s]).status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fockzero"))
        .args(["eval", "sigma", "1,1", "--out"])
        .arg(dir.path())
        .env("FOCKZERO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn norm_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = fockzero(dir.path(), &["norm", "--R", "1", "--p", "2,0.5,1", "--rho-max", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 3);
    let verdicts: Vec<&str> = lines.iter().map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(verdicts, ["convergent", "divergent", "borderline"]);
    let exps: Vec<f64> = lines.iter().map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((exps[0] + 2.0).abs() <= 0.3 && (exps[1] - 1.0).abs() <= 0.3 && exps[2].abs() <= 0.3);
    let rows = csv_rows(&dir.path().join("norm_trace.csv"));
    assert_eq!(rows.len(), 3 * 6);
}

#[test]
fn density_command_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = fockzero(dir.path(), &["density", "--R", "0.75"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("density_profile.csv"));
    assert_eq!(rows.len(), 6);
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    for line in summary.lines() {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() <= 0.05, "{line}");
    }
}
