use std::path::Path;
use std::process::{Command, Output};

fn paracalc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paracalc"))
        .args(args)
        .args(["--out", out.to_str().unwrap()])
        .env("PARACALC_THREADS", "1")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_paracalc")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("crossval"));
    assert_eq!(paracalc(&["nonsense"], dir.path()).status.code(), Some(1));
}

#[test]
fn sigma_run_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[solver]\nn = 32\n");
    let o = paracalc(&["sigma", "--config", &cfg, "--quiet"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let printed = String::from_utf8_lossy(&o.stdout);
    let run_dir = Path::new(printed.trim());
    assert!(run_dir.join("report.json").exists());
    assert!(run_dir.join("sigma.csv").exists());
}

#[test]
fn bad_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[solver]\nn = 30\n");
    assert_eq!(paracalc(&["sigma", "--config", &cfg], dir.path()).status.code(), Some(1));
    let cfg = write_config(dir.path(), "c.json", r#"{"solvr": {}}"#);
    let o = paracalc(&["sigma", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
    let missing = dir.path().join("none.toml");
    assert_eq!(paracalc(&["sigma", "--config", missing.to_str().unwrap()], dir.path()).status.code(), Some(1));
}

#[test]
fn failed_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[solver]\nn = 32\nhorizon = 0.01\n[crossval]\nsigma_offset = 50.0\nrefine = false\n",
    );
    let o = paracalc(&["crossval", "--config", &cfg, "--quiet"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
