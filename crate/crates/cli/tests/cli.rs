use std::fs;
use std::path::Path;
use std::process::Command;

fn capax(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_capax")).args(args).output().expect("binary runs")
}

fn duality(out: &Path) -> std::process::Output {
    capax(&["duality", "--cases", "2", "--seed", "5", "--out", out.to_str().unwrap()])
}

#[test]
fn duality_run_passes_and_repeats_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let first = duality(&a);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    assert_eq!(duality(&b).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let stdout = String::from_utf8(first.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("[5]") && l.contains("PASS")));
    assert!(a.with_extension("txt").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(capax(&["nonsense"]).status.code(), Some(2));
    assert_eq!(capax(&["hopf", "--h", "0"]).status.code(), Some(2));
    assert_eq!(capax(&["hopf", "--box", "-1,2"]).status.code(), Some(2));
}
