//! The binary's failure modes: bad input must produce a nonzero exit
//! and a diagnostic on stderr, never a panic or a silent success.

use std::process::Command;

fn gec(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_gec"))
        .args(args)
        .output()
        .expect("spawn gec")
}

fn write_config(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
    let path = dir.path().join("gec.toml");
    std::fs::write(&path, body).unwrap();
    path
}

const VALID: &str = r#"schema_version = 1
splits = ["test"]

[[languages]]
code = "hi"
"#;

#[test]
fn missing_config_file_fails_with_a_diagnostic() {
    let out = gec(&["validate", "--config", "/nonexistent/gec.toml"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error"), "stderr was: {stderr}");
    assert!(stderr.contains("gec.toml"), "stderr was: {stderr}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, &format!("{VALID}coffee = true\n"));
    let out = gec(&["validate", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("coffee"), "stderr was: {stderr}");
}

#[test]
fn unsupported_schema_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, &VALID.replace("schema_version = 1", "schema_version = 99"));
    let out = gec(&["validate", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("99"), "stderr was: {stderr}");
}

#[test]
fn unknown_system_filter_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, VALID);
    let out = gec(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--system",
        "no-such-system",
    ]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no-such-system"), "stderr was: {stderr}");
}

#[test]
fn missing_corpus_file_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, VALID); // data dir defaults to ./data, which is empty
    let out = gec(&["validate", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("test.tsv"), "stderr was: {stderr}");
}

#[test]
fn version_flag_works() {
    let out = gec(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("gec"));
}
