use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ccrlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccrlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = ccrlab(&["run", "--scenario", "infinity", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["infinity.csv", "infinity.json", "infinity_checks.csv", "infinity_rho.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 failed"));
}

#[test]
fn config_tolerance_override_can_fail_a_check() {
    let dir = tempfile::tempdir().unwrap();
    // D(N=100) is about 1e-2 at t = π/2; a tiny bound must fail.
    let cfg = write_config(
        dir.path(),
        "N = [100]\ntimes = [0.0, 1.5707963267948966]\n[tolerances]\nlimit_distance = 1e-9\n",
    );
    let o = ccrlab(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let checks = fs::read_to_string(dir.path().join("sweep_checks.csv")).unwrap();
    assert!(checks.lines().any(|l| l.starts_with("D(N=100) small") && l.contains(",fail,")));
}

#[test]
fn sweep_csv_has_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "N = [100, 1000, 10000]\ntimes = [0.0, 1.5707963267948966]\n[profile]\nkind = \"uniform\"\ncount = 4\n",
    );
    let o = ccrlab(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,t,Z1,Z2,Z,D"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn exit_codes_for_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(ccrlab(&["run", "--scenario", "bogus", "--out", out]).status.code(), Some(2));

    let bad = write_config(dir.path(), "times = [9.0]\n");
    assert_eq!(
        ccrlab(&["run", "--scenario", "infinity", "--config", &bad, "--out", out]).status.code(),
        Some(2)
    );

    let huge = write_config(dir.path(), "N = 9\n");
    assert_eq!(
        ccrlab(&["run", "--scenario", "reducible-brute", "--config", &huge, "--out", out]).status.code(),
        Some(3)
    );
}

#[test]
fn validate_is_green_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = ccrlab(&["validate", "--seed", "3", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    for f in ["validate.json", "validate_checks.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}
