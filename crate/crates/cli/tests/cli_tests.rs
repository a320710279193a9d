//! End-to-end CLI behavior through the compiled binary.

use std::io::Write;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wasubench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wasubench"))
}

fn write_script(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "#!/bin/sh").unwrap();
    f.write_all(body.as_bytes()).unwrap();
    drop(f);
    let mut perms = std::fs::metadata(&path).unwrap().permissions();
    perms.set_mode(0o755);
    std::fs::set_permissions(&path, perms).unwrap();
    path
}

/// A registry with one scripted engine and one two-benchmark group.
fn fixture_registry(dir: &Path) {
    let engine = write_script(
        dir,
        "engine.sh",
        "module=$1\necho \"ran $(basename \"$module\")\"\necho 'score: 10'\n",
    );
    std::fs::create_dir_all(dir.join("registry/runtimes")).unwrap();
    std::fs::write(
        dir.join("registry/runtimes/eng.json"),
        format!(
            r#"{{"name":"eng","exec":"{}","args_template":["{{module}}","{{args}}"]}}"#,
            engine.display()
        ),
    )
    .unwrap();
    let group_dir = dir.join("registry/benchmarks/g");
    std::fs::create_dir_all(&group_dir).unwrap();
    std::fs::write(group_dir.join("a.wasm"), b"\0asm").unwrap();
    std::fs::write(group_dir.join("b.wasm"), b"\0asm").unwrap();
    std::fs::write(
        group_dir.join("group.json"),
        r#"{"name":"g","benchmarks":[
            {"id":"a","module":"a.wasm","score_rule":{"pattern":"score: (\\d+)"}},
            {"id":"b","module":"b.wasm","args":["x"]}]}"#,
    )
    .unwrap();
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    wasubench()
        .current_dir(dir)
        .arg("--registry")
        .arg(dir.join("registry"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn unknown_flag_is_usage_error_exit_2() {
    let out = wasubench().arg("run").arg("--frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_usage_error_exit_2() {
    let out = wasubench().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_runtime_selector_fails_fast_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    fixture_registry(dir.path());
    let out = run_in(dir.path(), &["run", "--runtime", "ghost", "-o", "r.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown runtime"));
    // Fail-fast: nothing was executed, nothing written.
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn invalid_subruntime_selector_fails_fast() {
    let dir = tempfile::tempdir().unwrap();
    fixture_registry(dir.path());
    let out = run_in(dir.path(), &["run", "--runtime", "eng:ghost", "-o", "r.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn dry_run_prints_commands_without_executing() {
    let dir = tempfile::tempdir().unwrap();
    let marker = dir.path().join("executed");
    let engine = write_script(
        dir.path(),
        "engine.sh",
        &format!("touch {}\nexit 0\n", marker.display()),
    );
    std::fs::create_dir_all(dir.path().join("registry/runtimes")).unwrap();
    std::fs::write(
        dir.path().join("registry/runtimes/eng.json"),
        format!(
            r#"{{"name":"eng","exec":"{}","args_template":["--jit","{{module}}"]}}"#,
            engine.display()
        ),
    )
    .unwrap();
    let group_dir = dir.path().join("registry/benchmarks/g");
    std::fs::create_dir_all(&group_dir).unwrap();
    std::fs::write(group_dir.join("a.wasm"), b"\0asm").unwrap();
    std::fs::write(
        group_dir.join("group.json"),
        r#"{"name":"g","benchmarks":[{"id":"a","module":"a.wasm"}]}"#,
    )
    .unwrap();

    let out = run_in(dir.path(), &["run", "--dry-run"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("--jit"), "dry run should show resolved argv: {text}");
    assert!(text.contains("a.wasm"));
    assert!(!marker.exists(), "dry run must not execute the engine");
}

#[test]
fn run_writes_results_with_expected_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    fixture_registry(dir.path());
    let out = run_in(
        dir.path(),
        &["run", "--bench", "g/a", "--runtime", "eng", "-n", "2", "-o", "r.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let results = value["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["score"], serde_json::json!(10.0));
    assert_eq!(results[1]["repetition"], serde_json::json!(1));
}

#[test]
fn batch_mode_runs_everything_sorted() {
    let dir = tempfile::tempdir().unwrap();
    fixture_registry(dir.path());
    let out = run_in(dir.path(), &["run", "-o", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let ids: Vec<&str> = value["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["benchmark_id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, vec!["a", "b"]);
}

#[test]
fn export_prints_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    fixture_registry(dir.path());
    run_in(dir.path(), &["run", "-o", "r.json"]);
    let out = run_in(dir.path(), &["export", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.starts_with(
        "group,benchmark,runtime,subruntime,repetition,status,exit_code,wall_time_ns,peak_rss_bytes,peak_vms_bytes,score\n"
    ));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn registry_env_var_override_works() {
    let dir = tempfile::tempdir().unwrap();
    fixture_registry(dir.path());
    let out = wasubench()
        .current_dir(dir.path())
        .env("WASUBENCH_REGISTRY", dir.path().join("registry"))
        .args(["benchmarks", "list"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("g (2 benchmarks)"));
}

#[test]
fn runtimes_add_show_remove_cycle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("registry")).unwrap();
    let spec_path = dir.path().join("new.json");
    std::fs::write(
        &spec_path,
        r#"{"name":"fresh","exec":"/bin/true","args_template":["{module}"]}"#,
    )
    .unwrap();

    let out = run_in(dir.path(), &["runtimes", "add", spec_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run_in(dir.path(), &["runtimes", "show", "fresh"]);
    assert!(stdout_of(&out).contains("/bin/true"));

    // Duplicate registration fails.
    let out = run_in(dir.path(), &["runtimes", "add", spec_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = run_in(dir.path(), &["runtimes", "remove", "fresh"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run_in(dir.path(), &["runtimes", "list"]);
    assert!(!stdout_of(&out).contains("fresh"));
}

#[test]
fn benchmarks_show_single_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    fixture_registry(dir.path());
    let out = run_in(dir.path(), &["benchmarks", "show", "g/b"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("g/b"));
    assert!(text.contains("args: x"));
}

#[test]
fn check_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    fixture_registry(dir.path());
    let out = run_in(
        dir.path(),
        &["check", "--set", "g", "--runtime", "eng", "--csv", "matrix.csv", "--timeout", "2000"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("yes"));
    let csv = std::fs::read_to_string(dir.path().join("matrix.csv")).unwrap();
    assert!(csv.starts_with("payload,engine,verdict\n"));
    assert_eq!(csv.lines().count(), 3);
}
