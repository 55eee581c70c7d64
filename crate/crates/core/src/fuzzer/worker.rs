//! The fuzzer client loop: fuzz, synchronize with the explorer's output
//! directory on a dynamic interval, and report progress as JSON lines.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use log::debug;
use serde::{Deserialize, Serialize};

use super::feedback::ObjectiveKind;
use super::state::{FuzzerConfig, FuzzerState};
use crate::analysis::TargetAnalysis;
use crate::clock::TimeScale;
use crate::error::{IoContext, Result};
use crate::orchestrator::next_sync_interval;
use crate::program::ProgramModel;

/// One line of a worker log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum WorkerEvent {
    Ready {
        worker: usize,
        elapsed_ms: u64,
        corpus: usize,
    },
    Status {
        worker: usize,
        elapsed_ms: u64,
        corpus: usize,
        objectives: usize,
        execs: u64,
        exec_per_sec: f64,
        coverage: usize,
    },
    Objective {
        worker: usize,
        elapsed_ms: u64,
        file: String,
        kind: ObjectiveKind,
        reached_targets: Vec<String>,
    },
    Sync {
        worker: usize,
        elapsed_ms: u64,
        imported: usize,
        admitted: usize,
        duration_ms: u64,
        next_sync_secs: f64,
    },
    Stopped {
        worker: usize,
        elapsed_ms: u64,
        execs: u64,
    },
}

/// Append-only JSON-lines writer. Each event is a single `write` call.
pub struct EventLog {
    file: File,
}

impl EventLog {
    pub fn open(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path).at(path)?;
        Ok(EventLog { file })
    }

    pub fn emit<T: Serialize>(&mut self, event: &T) -> std::io::Result<()> {
        let mut line = serde_json::to_vec(event).expect("events always serialize");
        line.push(b'\n');
        self.file.write_all(&line)
    }
}

#[derive(Debug, Clone)]
pub struct SyncSettings {
    pub dir: PathBuf,
    pub import_all: bool,
}

#[derive(Debug, Clone)]
pub struct WorkerSettings {
    pub fuzzer: FuzzerConfig,
    /// `None` for pure fuzzing.
    pub sync: Option<SyncSettings>,
    pub initial_corpus: Option<PathBuf>,
    pub log_path: PathBuf,
    pub time_scale: TimeScale,
    pub campaign_start: Instant,
    /// Rebuild from the corpus directory instead of starting fresh.
    pub resume: bool,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct WorkerSummary {
    pub execs: u64,
    pub corpus: usize,
    pub objectives: usize,
    pub syncs: usize,
}

/// Runs a fuzzer client until `stop` is raised.
pub fn run_fuzzer_worker(
    program: &ProgramModel,
    analysis: &TargetAnalysis,
    settings: &WorkerSettings,
    stop: &AtomicBool,
) -> Result<WorkerSummary> {
    let worker = settings.fuzzer.worker_id;
    let since_start = || settings.campaign_start.elapsed().as_millis() as u64;
    let mut log = EventLog::open(&settings.log_path)?;
    let log_path = settings.log_path.clone();
    let emit = |log: &mut EventLog, ev: WorkerEvent| log.emit(&ev).at(&log_path);

    let mut state = FuzzerState::new(settings.fuzzer.clone(), analysis)?;
    let mut pending = Vec::new();
    if settings.resume {
        state.resume(program)?;
    } else if let Some(dir) = &settings.initial_corpus {
        pending.extend(state.load_initial_corpus(program, dir)?.new_objectives);
    }
    if state.corpus.is_empty() {
        pending.extend(state.bootstrap(program)?.new_objectives);
    }
    emit(&mut log, WorkerEvent::Ready { worker, elapsed_ms: since_start(), corpus: state.corpus.len() })?;

    let report_objectives = |log: &mut EventLog, state: &FuzzerState, idx: &[usize]| -> Result<()> {
        for &i in idx {
            let o = &state.objectives[i];
            let ev = WorkerEvent::Objective {
                worker,
                elapsed_ms: since_start(),
                file: o.seed.file_name.clone(),
                kind: o.kind,
                reached_targets: o.metadata.reached_targets.clone(),
            };
            log.emit(&ev).at(&settings.log_path)?;
        }
        Ok(())
    };
    report_objectives(&mut log, &state, &pending)?;

    let scale = settings.time_scale;
    let status_every = scale.to_wall(1.0);
    let mut next_status = Instant::now() + status_every;
    let mut last_status = (Instant::now(), state.execs);
    let mut next_sync = Instant::now() + scale.to_wall(next_sync_interval(None));
    let mut syncs = 0;

    let status = |state: &FuzzerState, last: (Instant, u64)| {
        let secs = last.0.elapsed().as_secs_f64().max(1e-9);
        WorkerEvent::Status {
            worker,
            elapsed_ms: since_start(),
            corpus: state.corpus.len(),
            objectives: state.objectives.len(),
            execs: state.execs,
            exec_per_sec: (state.execs - last.1) as f64 / secs,
            coverage: state.global_coverage.len(),
        }
    };

    while !stop.load(Ordering::Relaxed) {
        let report = state.fuzz_iteration(program)?;
        report_objectives(&mut log, &state, &report.new_objectives)?;

        let now = Instant::now();
        if let Some(sync) = &settings.sync {
            if now >= next_sync {
                let r = state.sync_from_dir(program, &sync.dir, sync.import_all)?;
                report_objectives(&mut log, &state, &r.new_objectives)?;
                let interval = next_sync_interval(Some(scale.to_nominal(r.duration)));
                next_sync = Instant::now() + scale.to_wall(interval);
                syncs += 1;
                debug!("worker {worker}: imported {} seeds, next sync in {interval}s", r.imported);
                emit(
                    &mut log,
                    WorkerEvent::Sync {
                        worker,
                        elapsed_ms: since_start(),
                        imported: r.imported,
                        admitted: r.admitted,
                        duration_ms: r.duration.as_millis() as u64,
                        next_sync_secs: interval,
                    },
                )?;
            }
        }
        if now >= next_status {
            emit(&mut log, status(&state, last_status))?;
            last_status = (now, state.execs);
            next_status = now + status_every;
        }
    }

    emit(&mut log, status(&state, last_status))?;
    emit(&mut log, WorkerEvent::Stopped { worker, elapsed_ms: since_start(), execs: state.execs })?;
    Ok(WorkerSummary {
        execs: state.execs,
        corpus: state.corpus.len(),
        objectives: state.objectives.len(),
        syncs,
    })
}
