use std::process::Command;

fn hypex() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hypex"))
}

#[test]
fn run_writes_artifacts_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = hypex().args(["run", "lmi-verify", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run_dir = dir.path().join("lmi-verify");
    assert!(run_dir.is_dir());
    assert!(std::fs::read_dir(run_dir).unwrap().count() > 0);
}

#[test]
fn print_config_reflects_seed_override() {
    let out = hypex().args(["run", "compare-noise", "--seed", "7", "--print-config"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.replace(' ', "") == "seed=7"), "{text}");
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.txt");
    std::fs::write(&path, "horizon = 3\n").unwrap();
    let out = hypex().args(["run", "ex2-hyper", "--print-config", "--config"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.replace(' ', "") == "horizon=3"), "{text}");
}

#[test]
fn bad_input_exits_with_code_2() {
    let out = hypex().args(["run", "no-such-experiment"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.txt");
    std::fs::write(&path, "not_a_key = 1\n").unwrap();
    let out = hypex().args(["run", "ex1-sampled-finite-time", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
