use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CUSTOM: &str = "\
[scenario]
name = custom

[params]
Omega = 0.1
Omega_c = 0.5
Delta = 1.0
delta = 0.0
Gamma = 1.0
nu = 1.0
eta = 0.05

[sweep]
axis = Omega
start = 0.05
stop = 0.15
points = 3
";

fn starkcool(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starkcool"))
        .current_dir(dir)
        .env_remove("STARKCOOL_OUTPUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn lists_every_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out = starkcool(dir.path(), &["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig-timerate", "fig-parabola", "fig-dynamics", "fig-chain", "pulsed", "robustness", "custom"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn validate_accepts_good_and_names_bad_fields() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.ini", CUSTOM);
    let out = starkcool(dir.path(), &["validate", &good]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("[params]"));

    let bad = write(
        dir.path(),
        "bad.ini",
        &CUSTOM.replace("nu = 1.0\n", "").replace("Gamma = 1.0", "Gamma = -1"),
    );
    let out = starkcool(dir.path(), &["validate", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("params.nu"), "{err}");
    assert!(err.contains("Gamma"), "{err}");
}

#[test]
fn run_writes_csv_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.ini", CUSTOM);
    let out = starkcool(dir.path(), &["run", &cfg, "--seed", "42", "-o", "out.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(csv.contains("# master_seed = 42"));
    assert!(csv.contains("# name = custom"));
    assert!(csv.contains("axis,axis_value,observable,value,std_error,provenance"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("Omega,")).count(), 12);
}

#[test]
fn output_dir_variable_prefixes_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let target = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.ini", CUSTOM);
    let out = Command::new(env!("CARGO_BIN_EXE_starkcool"))
        .current_dir(dir.path())
        .env("STARKCOOL_OUTPUT_DIR", target.path())
        .args(["run", &cfg])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(target.path().join("custom.csv").exists());
    assert!(!dir.path().join("custom.csv").exists());
}

#[test]
fn stdout_output_and_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.ini", CUSTOM);
    let a = starkcool(dir.path(), &["run", &cfg, "-o", "-"]);
    let b = starkcool(dir.path(), &["run", &cfg, "-o", "-", "--threads", "1"]);
    assert!(a.status.success() && b.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn truncation_exits_with_its_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.ini",
        "[scenario]\nname = fig-dynamics\ninitial = fock:4\n\n[solver]\ncutoffs = 5\nt_end = 2\nn_traj = 2\n",
    );
    let out = starkcool(dir.path(), &["run", &cfg, "-o", "-"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_config_is_an_io_error_and_custom_needs_a_file() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(starkcool(dir.path(), &["run", "nope.ini"]).status.code(), Some(1));
    assert_ne!(starkcool(dir.path(), &["run", "--scenario", "custom"]).status.code(), Some(0));
}
