use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn programs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

fn hyfuzz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyfuzz"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, program: &str, extra: &str) -> PathBuf {
    let path = dir.join("campaign.toml");
    let program = programs().join(program);
    let text = format!(
        "[explorer]\ntarget = {p:?}\njobs = 1\n\n[difuzz]\ntarget = {p:?}\nargs = \"-j1\"\npath = \"work\"\n\n{extra}",
        p = program.display().to_string()
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn analyze_prints_ets_and_distances() {
    let out = hyfuzz(&["analyze", "--program", programs().join("magic4.toml").to_str().unwrap()]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["ets"].as_array().unwrap().len(), 1);
    assert_eq!(json["distances"]["14"], 0);
    assert!(json["unreachable"].as_array().unwrap().is_empty());
}

#[test]
fn analyze_rejects_unknown_location() {
    let out = hyfuzz(&[
        "analyze",
        "--program",
        programs().join("magic4.toml").to_str().unwrap(),
        "--target",
        "x=nowhere.c:1",
    ]);
    assert!(!out.status.success());
}

#[test]
fn run_writes_report_and_triage_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "nested.toml", "[stop]\nmax_duration_secs = 20\nstop_on_all_targets = true\n");
    let out = hyfuzz(&["run", "--config", config.to_str().unwrap(), "--seed", "3"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["stop_reason"], "all targets");
    assert!(report["targets"][0]["first_reach_secs"].is_number());

    let work = dir.path().join("work");
    assert!(work.join("report.json").is_file());
    let objectives = work.join("objectives");
    let before = report["objectives_after_minimization"].as_u64().unwrap();
    let out = hyfuzz(&[
        "triage",
        "--objectives",
        objectives.to_str().unwrap(),
        "--program",
        programs().join("nested.toml").to_str().unwrap(),
        "--out",
        dir.path().join("resorted").to_str().unwrap(),
    ]);
    assert_eq!(stdout(&out).trim(), format!("kept {before}, archived 0"));
    assert!(dir.path().join("resorted/nested.c_6").is_dir());
}

#[test]
fn pure_mode_runs_without_explorers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "multi.toml", "[stop]\nmax_duration_secs = 2\n");
    let out = hyfuzz(&["run", "--config", config.to_str().unwrap(), "--mode", "pure"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["mode"], "pure");
    assert_eq!(report["workers"]["explorers"], 0);
}

#[test]
fn bench_writes_one_row_per_run_and_target_plus_best() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("tte.csv");
    let out = hyfuzz(&[
        "bench",
        "--program",
        programs().join("nested.toml").to_str().unwrap(),
        "--reps",
        "2",
        "--timeout-secs",
        "10",
        "--modes",
        "hybrid,pure",
        "--work",
        dir.path().join("runs").to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    stdout(&out);
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["mode", "repetition", "target_id", "tte_seconds"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    // 2 modes x 2 repetitions x 1 target, plus a best row per mode
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.iter().filter(|r| &r[1] == "best").count(), 2);
}

#[test]
fn invalid_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[difuzz]\ntarget = \"x.toml\"\npath = \"w\"\n").unwrap();
    let out = hyfuzz(&["run", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));

    let config = write_config(dir.path(), "magic4.toml", "[stop]\nmax_duration_secs = -1\n");
    assert!(!hyfuzz(&["run", "--config", config.to_str().unwrap()]).status.success());
}
