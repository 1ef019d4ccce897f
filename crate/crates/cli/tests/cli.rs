use std::process::{Command, Output};

fn magsteklov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magsteklov")).args(args).output().unwrap()
}

#[test]
fn disk_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = magsteklov(&["--out", dir.path().to_str().unwrap(), "disk", "--b", "0.5", "1.0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("disk.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("b,lambda_disk"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 0.5);
    assert_eq!(row[1], magsteklov::disk::lambda_disk(0.5, 1.0).unwrap());
    assert_eq!(lines.count(), 1);
}

#[test]
fn disk_outside_regime_is_rejected() {
    let out = magsteklov(&["disk", "--b", "2.0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = magsteklov(&["--override-regime", "disk", "--b", "2.0"]);
    assert!(out.status.success());
}

#[test]
fn bessel_prints_tagged_rows() {
    let out = magsteklov(&["bessel", "0.5", "30"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,order,kind,value,method");
    assert_eq!(lines.len(), 9);
    assert!(lines[1].starts_with("0.5,0,I,") && lines[1].ends_with(",series"));
    for l in &lines[5..] {
        let tag = if l.contains(",I,") { ",asymptotic" } else { ",continued-fraction" };
        assert!(l.ends_with(tag), "{l}");
    }
}

#[test]
fn empty_campaign_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, r#"{"schema": 1}"#).unwrap();
    let report = dir.path().join("report");
    let out = magsteklov(&["--out", report.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report.join("report.json").exists());
    assert!(report.join("summary.csv").exists());
}

#[test]
fn guard_violation_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"schema": 1, "bounded": [{"domain": {"family": "disk", "params": {"radius": 1.0}}, "b": [2.0]}]}"#).unwrap();
    let out = magsteklov(&["--out", dir.path().join("r").to_str().unwrap(), "run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("regime") || err.contains("bR"), "{err}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, r#"{"schema": 1, "exteriour": []}"#).unwrap();
    assert_eq!(magsteklov(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn offset_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let domain = r#"{"family": "rectangle", "params": {"width": 1.0, "height": 1.0}}"#;
    let out = magsteklov(&["--out", dir.path().to_str().unwrap(), "offset", "--domain", domain, "--t", "0.1", "0.5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("offset.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,length,cx,cy,second_moment,simple"));
    for (line, t) in lines.zip([0.1, 0.5]) {
        let cols: Vec<&str> = line.split(',').collect();
        let length: f64 = cols[1].parse().unwrap();
        assert!((length - (4.0 + std::f64::consts::TAU * t)).abs() < 1e-8);
        assert_eq!(cols[5], "true");
    }
}
