use std::path::Path;
use std::process::{Command, Output};

use fracheat_core::VerificationReport;

fn fracheat(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracheat"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FRACHEAT_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn swanson_table_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracheat(&["cov", "--kernel", "swanson", "--grid", "0:1:5", "--format", "csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(dir.path().join("cov.csv")).unwrap();
    let golden = include_str!("golden/cov_swanson.csv");
    assert_eq!(got, golden);
    assert_eq!(got.lines().count(), 26);
    // entry (1,1) is sqrt(2) / sqrt(2 pi) = 1/sqrt(pi)
    let last: Vec<f64> = got.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(&last[..2], &[1.0, 1.0]);
    assert!((last[2] - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
}

#[test]
fn single_pair_and_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = fracheat(&["cov", "--kernel", "rx", "--H", "0.75", "--grid", "single:1,0", "--out", "p.csv"], dir.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(text, "t,s,value\n1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0\n");
    let o = fracheat(&["cov", "--kernel", "swanson", "--grid", "0:1:0", "--out", "e.csv"], dir.path());
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_to_string(dir.path().join("e.csv")).unwrap(), "t,s,value\n");
}

#[test]
fn verify_json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "--check", "decomposition", "--d", "1", "--H", "0.75", "--format", "json", "--out", "v.json"];
    let o = fracheat(&args, dir.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("v.json")).unwrap();
    let reports: Vec<VerificationReport> = serde_json::from_str(&text).unwrap();
    assert_eq!(reports.len(), 1);
    assert!(reports[0].pass && reports[0].check == "decomposition");
    assert_eq!(serde_json::to_string_pretty(&reports).unwrap() + "\n", text);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // the (H/2) constant for T2 is violated on the default grid
    let o = fracheat(&["verify", "--check", "increments", "--H", "0.75", "--out", "inc.csv"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("inc.csv"));
    let csv = std::fs::read_to_string(dir.path().join("inc.csv")).unwrap();
    assert!(csv.starts_with("check,H,d,worst_abs,worst_rel,t,s,pass\n"));
    assert!(csv.lines().any(|l| l.starts_with("t2_bound_h_half,") && l.ends_with(",false")));

    for bad in [
        vec!["cov", "--kernel", "rx", "--H", "0.4"],
        vec!["cov", "--kernel", "rx"],
        vec!["cov", "--kernel", "swanson", "--grid", "1:0:4"],
        vec!["spde-mc", "--L", "1"],
        vec!["verify", "--d", "2"],
        vec!["frobnicate"],
        vec!["cov", "--kernel", "swanson", "--config", "missing.json"],
    ] {
        let o = fracheat(&bad, dir.path());
        assert_eq!(code(&o), 2, "{bad:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = fracheat(&["cov", "--kernel", "rx", "--H", "0.4"], dir.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid H"));

    let o = fracheat(&["cov", "--kernel", "swanson", "--out", "no/such/dir/x.csv"], dir.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"command": "cov", "kernel": "bifbm", "H": 0.5, "K": 1.0, "grid": "0.5,1", "format": "json", "out": "c.json"}"#,
    )
    .unwrap();
    let o = fracheat(&["--config", "run.json", "--K", "0.5"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(v["kernel"]["k"], 0.5);
    // bifBm(1/2, 1/2) at (1, 1) is 2^-1/2 (2^1/2 - 0) = 1
    assert!((v["rows"][3]["value"].as_f64().unwrap() - 1.0).abs() < 1e-15);

    std::fs::write(dir.path().join("bad.json"), r#"{"command": "cov", "hurst": 0.5}"#).unwrap();
    assert_eq!(code(&fracheat(&["--config", "bad.json"], dir.path())), 2);
}

#[test]
fn out_dir_variable_sets_default_location() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("artifacts");
    std::fs::create_dir(&target).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_fracheat"))
        .args(["cov", "--kernel", "swanson", "--grid", "1", "--format", "json"])
        .current_dir(dir.path())
        .env("FRACHEAT_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(target.join("cov.json").exists());
    // nothing besides the artifact, in particular no leftover temp file
    assert_eq!(std::fs::read_dir(&target).unwrap().count(), 1);
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        let args = [
            "sample", "--kernel", "rx", "--H", "0.75", "--grid", "0:1:8", "--paths", "50", "--seed", seed, "--out", out,
        ];
        assert_eq!(code(&fracheat(&args, dir.path())), 0);
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let (a, b, c) = (run("3", "a.csv"), run("3", "b.csv"), run("4", "c.csv"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with(b"path,t,value\n"));
}
