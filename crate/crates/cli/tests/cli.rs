use std::process::{Command, Output};

use normlab::attainment::{AttainmentSet, SbpbProfile};
use normlab::convexity::AuerbachSystem;
use normlab::normcomp::NormResult;
use normlab::repro::ReproReport;

fn normlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normlab"))
        .args(args)
        .env_remove("NORMLAB_REPORT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn opnorm_diag_into_linf() {
    let o = normlab(&["opnorm", "--p", "2", "--q", "inf", "--matrix", "0.5,0;0,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: NormResult = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.value, 1.0);
    assert_eq!(r.witnesses, vec![vec![0.0, 1.0], vec![0.0, -1.0]]);
    assert!(r.certified);
}

#[test]
fn matrix_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, "[[0.5, 0], [0, 1]]").unwrap();
    let o = normlab(&["opnorm", "--p", "2", "--q", "2", "--matrix", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("value,lower_bound,upper_bound,certified,method"));
    assert!(lines.next().unwrap().starts_with("1,"));
}

#[test]
fn repro_diag_pq_reports_distance() {
    let dir = tempfile::tempdir().unwrap();
    let o = normlab(&[
        "repro", "--tag", "DIAG-P-Q", "--p", "1.5", "--q", "3", "--beta", "0.5",
        "--report-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: ReproReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r.overall);
    let d = r.checks.iter().find(|c| c.name == "dist(e1, NA)").unwrap();
    assert!((d.computed - 2f64.powf(1.0 / 1.5)).abs() < 1e-4);
    let index = std::fs::read_to_string(dir.path().join("index.csv")).unwrap();
    assert_eq!(index.lines().next(), Some("tag,params,overall,worst_check_residual,runtime_ms"));
    assert_eq!(index.lines().count(), 2);
    assert!(dir.path().join("DIAG-P-Q.json").is_file());
}

#[test]
fn report_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_normlab"))
        .args(["repro", "--tag", "DIAG-2-2", "--beta", "0.9"])
        .env("NORMLAB_REPORT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("DIAG-2-2.json").is_file());
}

#[test]
fn eta_profile_csv_for_lplq() {
    let o = normlab(&["eta", "--tag", "LPLQ-FAIL-N", "--blocks", "5", "--eps", "0.5,0.9", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(text.lines().next(), Some("epsilon,rho,eta"));
    assert_eq!(rows.len(), 2);
    assert!(rows[1][2] <= 0.1 + 1e-3);
}

#[test]
fn json_records_round_trip() {
    let o = normlab(&["na", "--tag", "ROT-2-Q", "--beta", "1", "--q", "1.5"]);
    let set: AttainmentSet = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(set.points.len(), 4);
    let o = normlab(&["eta", "--tag", "DIAG-2-2", "--eps", "1"]);
    let prof: SbpbProfile = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((prof.eta[0] - (1.0 - 0.4375f64.sqrt())).abs() < 1e-6);
    let o = normlab(&["auerbach", "--p", "3"]);
    let sys: AuerbachSystem = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(sys.biorthogonality_residual() < 1e-12);
}

#[test]
fn seeded_runs_are_identical() {
    let args = ["eta", "--matrix", "0.3,0.9;-0.7,0.2", "--p", "3", "--q", "2", "--eps", "0.25,0.5", "--seed", "4"];
    assert_eq!(normlab(&args).stdout, normlab(&args).stdout);
    let strip = |o: Output| {
        let mut r: ReproReport = serde_json::from_str(&stdout(&o)).unwrap();
        r.runtime_ms = 0;
        serde_json::to_string(&r).unwrap()
    };
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["repro", "--tag", "BLOCK-N", "--blocks", "3", "--seed", "9", "--report-dir", d];
    assert_eq!(strip(normlab(&args)), strip(normlab(&args)));
}

#[test]
fn delta_l1_at_two() {
    let o = normlab(&["delta", "--p", "1", "--eps", "2", "--format", "csv"]);
    assert_eq!(stdout(&o), "epsilon,delta\n2,0\n");
}

#[test]
fn gallery_lists_every_tag() {
    let o = normlab(&["gallery"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let entries = v.as_array().unwrap();
    assert_eq!(entries.len(), 11);
    assert!(entries.iter().all(|e| !e["claim"].as_str().unwrap().is_empty()));
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    for args in [
        vec!["repro", "--tag", "ROT-2-Q", "--q", "2", "--beta", "1"],
        vec!["opnorm", "--p", "0.5", "--q", "2", "--matrix", "1,0;0,1"],
        vec!["opnorm", "--p", "2", "--q", "2", "--matrix", "1,0;0"],
        vec!["delta", "--p", "2", "--eps", "3"],
        vec!["opnorm", "--p", "2"],
        vec!["na", "--tag", "DIAG-P-Q", "--p", "3", "--q", "2"],
    ] {
        let o = normlab(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        let err = stderr(&o);
        assert!(!err.trim().is_empty(), "{args:?}");
        if !err.starts_with("error: invalid value") {
            assert_eq!(err.trim().lines().count(), 1, "{args:?}: {err}");
        }
    }
    let o = normlab(&["repro", "--tag", "ROT-2-Q", "--q", "2", "--beta", "1"]);
    assert!(stderr(&o).contains("hypothesis violated for ROT-2-Q"));
    let o = normlab(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}
