use std::path::PathBuf;
use std::sync::atomic::AtomicBool;
use std::time::Duration;

use hyfuzz::orchestrator::{run_hybrid, HybridConfig, StopReason};
use hyfuzz::Error;

fn program(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs").join(name)
}

#[test]
fn nested_campaign_reaches_target_and_lays_out_work_dir() {
    let dir = tempfile::tempdir().unwrap();
    let work = dir.path().join("work");
    let mut config = HybridConfig::new(program("nested.toml"), &work);
    config.stop.max_duration = Some(Duration::from_secs(20));
    config.stop.stop_on_all_targets = true;

    let report = run_hybrid(&config, &AtomicBool::new(false)).unwrap();
    assert_eq!(report.stop_reason, StopReason::AllTargets.to_string());
    assert_eq!(report.mode, "hybrid");
    assert!(report.first_reach("fuz").is_some());
    assert!(report.execs > 0);
    assert!(report.objectives_after_minimization >= 1);
    assert!(report.objectives_after_minimization <= report.objectives_before_minimization);

    for sub in ["corpus/w0", "sync", "objectives", "logs", "sorted"] {
        assert!(work.join(sub).is_dir(), "missing {sub}");
    }
    let on_disk: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(work.join("report.json")).unwrap()).unwrap();
    assert_eq!(on_disk["reached_targets"], serde_json::json!(report.reached_targets));
    assert!(work.join("sorted/nested.c_6").is_dir());
}

#[test]
fn pure_campaign_has_no_explorer_activity() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = HybridConfig::new(program("multi.toml"), dir.path().join("work"));
    config.explorer.jobs = 0;
    config.stop.max_duration = Some(Duration::from_secs(2));

    let report = run_hybrid(&config, &AtomicBool::new(false)).unwrap();
    assert_eq!(report.mode, "pure");
    assert_eq!(report.explorer.runs, 0);
    assert_eq!(report.workers.explorers, 0);
}

#[test]
fn interrupt_stops_the_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let config = HybridConfig::new(program("magic4.toml"), dir.path().join("work"));
    let report = run_hybrid(&config, &AtomicBool::new(true)).unwrap();
    assert_eq!(report.stop_reason, StopReason::Interrupted.to_string());
}

#[test]
fn non_empty_work_dir_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("stale"), b"x").unwrap();
    let config = HybridConfig::new(program("magic4.toml"), dir.path());
    let err = run_hybrid(&config, &AtomicBool::new(false)).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err:?}");
}
