//! The hybrid campaign: fuzzer clients and explorer workers as threads,
//! with the orchestrator loop on the calling thread.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::thread::{self, Scope, ScopedJoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use super::config::HybridConfig;
use super::queue::{enqueue_corpus_updates, PriorityEntry, SeedQueue};
use super::stop::{check_stop, RunStats, StopDecision, StopReason};
use super::triage::{minimize_objectives, sort_objectives};
use crate::analysis::TargetAnalysis;
use crate::error::{Error, IoContext, Result};
use crate::explorer::{run_explorer_until, ExplorerReport, SolutionKind};
use crate::fsutil::{file_name, list_seed_files};
use crate::fuzzer::{
    run_fuzzer_worker, EventLog, FuzzerConfig, ObjectiveKind, Schedule, SyncSettings, WorkerEvent, WorkerSettings,
    WorkerSummary, DEFAULT_MAX_INPUT_LEN,
};
use crate::program::ProgramModel;

/// Restarts allowed per worker before the campaign gives up.
pub const MAX_RESTARTS: usize = 3;
/// How long fuzzer clients get to report readiness.
pub const READY_TIMEOUT: Duration = Duration::from_secs(30);
/// Queue refresh and statistics period, nominal seconds.
pub const QUEUE_UPDATE_SECS: f64 = 60.0;
/// Client status period, nominal seconds.
pub const STATUS_SECS: f64 = 1.0;

/// One line of an explorer worker log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ExplorerEvent {
    Generated {
        worker: usize,
        seed: PathBuf,
        file: PathBuf,
        inverted_index: usize,
        kind: SolutionKind,
    },
    Run {
        worker: usize,
        seed: PathBuf,
        attempted: usize,
        generated: usize,
        unsat: usize,
        budget_exceeded: usize,
        solve_ms: u64,
    },
    Failed {
        worker: usize,
        seed: PathBuf,
        error: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkerCensus {
    pub fuzzers: usize,
    pub explorers: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub id: String,
    pub location: String,
    /// Seconds from campaign start to the first objective reaching it.
    pub first_reach_secs: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExplorerTotals {
    pub runs: usize,
    pub generated: usize,
    pub full: usize,
    pub optimistic: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalReport {
    pub mode: String,
    pub schedule: String,
    pub stop_reason: String,
    pub elapsed_secs: f64,
    pub clock_scale: f64,
    pub workers: WorkerCensus,
    pub targets: Vec<TargetReport>,
    pub reached_targets: Vec<String>,
    pub first_crash_secs: Option<f64>,
    pub execs: u64,
    pub corpus_size: usize,
    pub objectives_before_minimization: usize,
    pub objectives_after_minimization: usize,
    pub explorer: ExplorerTotals,
}

impl FinalReport {
    pub fn first_reach(&self, target_id: &str) -> Option<f64> {
        self.targets.iter().find(|t| t.id == target_id).and_then(|t| t.first_reach_secs)
    }
}

/// One line of `stats.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub elapsed_secs: f64,
    pub corpus: usize,
    pub objectives: usize,
    pub exec_per_sec: f64,
    pub last_objective_secs: Option<f64>,
    pub queue: usize,
    pub reached_targets: Vec<String>,
}

/// Incremental reader of a JSON-lines log that another thread appends to.
struct LogTail {
    path: PathBuf,
    offset: u64,
    partial: String,
}

impl LogTail {
    fn new(path: PathBuf) -> Self {
        LogTail {
            path,
            offset: 0,
            partial: String::new(),
        }
    }

    fn read_new<T: for<'de> Deserialize<'de>>(&mut self) -> Vec<T> {
        let Ok(mut f) = File::open(&self.path) else {
            return Vec::new();
        };
        let mut buf = String::new();
        if f.seek(SeekFrom::Start(self.offset)).is_err() || f.read_to_string(&mut buf).is_err() {
            return Vec::new();
        }
        self.offset += buf.len() as u64;
        self.partial.push_str(&buf);
        let mut out = Vec::new();
        while let Some(nl) = self.partial.find('\n') {
            let line: String = self.partial.drain(..=nl).collect();
            match serde_json::from_str(line.trim_end()) {
                Ok(ev) => out.push(ev),
                Err(e) => warn!("{}: unparseable line: {e}", self.path.display()),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
struct ClientStatus {
    corpus: usize,
    exec_per_sec: f64,
    coverage: usize,
}

/// Everything the orchestrator learns from the fuzzer logs.
#[derive(Debug, Default)]
struct Observed {
    ready: BTreeSet<usize>,
    clients: BTreeMap<usize, ClientStatus>,
    first_reach_ms: BTreeMap<String, u64>,
    first_crash_ms: Option<u64>,
    last_objective_ms: Option<u64>,
    objectives: usize,
}

impl Observed {
    fn apply(&mut self, ev: WorkerEvent) {
        match ev {
            WorkerEvent::Ready { worker, .. } => {
                self.ready.insert(worker);
            }
            WorkerEvent::Status {
                worker,
                corpus,
                objectives,
                exec_per_sec,
                coverage,
                ..
            } => {
                debug!("client {worker}: corpus {corpus}, objectives {objectives}, {exec_per_sec:.0} exec/s");
                self.clients.insert(
                    worker,
                    ClientStatus {
                        corpus,
                        exec_per_sec,
                        coverage,
                    },
                );
            }
            WorkerEvent::Objective {
                elapsed_ms,
                kind,
                reached_targets,
                ..
            } => {
                self.objectives += 1;
                self.last_objective_ms = Some(self.last_objective_ms.map_or(elapsed_ms, |m| m.max(elapsed_ms)));
                if kind == ObjectiveKind::Crash {
                    self.first_crash_ms = Some(self.first_crash_ms.map_or(elapsed_ms, |m| m.min(elapsed_ms)));
                }
                for loc in reached_targets {
                    let e = self.first_reach_ms.entry(loc).or_insert(elapsed_ms);
                    *e = (*e).min(elapsed_ms);
                }
            }
            WorkerEvent::Sync { .. } | WorkerEvent::Stopped { .. } => {}
        }
    }

    fn coverage(&self) -> usize {
        self.clients.values().map(|c| c.coverage).sum()
    }

    fn corpus(&self) -> usize {
        self.clients.values().map(|c| c.corpus).sum()
    }

    fn exec_per_sec(&self) -> f64 {
        self.clients.values().map(|c| c.exec_per_sec).sum()
    }
}

struct ExplorerJob {
    seed: PathBuf,
}

struct ExplorerDone {
    worker: usize,
    result: std::result::Result<ExplorerReport, String>,
}

struct Shared<'a> {
    config: &'a HybridConfig,
    program: &'a ProgramModel,
    analysis: &'a TargetAnalysis,
    campaign_start: Instant,
    stop_workers: AtomicBool,
}

fn ms_to_secs(ms: u64) -> f64 {
    ms as f64 / 1000.0
}

fn prepare_work_dir(config: &HybridConfig) -> Result<()> {
    let root = &config.difuzz.path;
    if root.exists() && std::fs::read_dir(root).at(root)?.next().is_some() {
        return Err(Error::Config(format!("work directory {} is not empty", root.display())));
    }
    let mut dirs = vec![config.objective_dir(), config.sync_dir(), config.log_dir()];
    dirs.extend((0..config.difuzz.jobs).map(|i| config.corpus_dir(i)));
    for d in dirs {
        std::fs::create_dir_all(&d).at(&d)?;
    }
    Ok(())
}

fn fuzzer_settings(shared: &Shared, worker: usize, resume: bool) -> WorkerSettings {
    let config = shared.config;
    let mut fuzzer = FuzzerConfig::new(worker, config.corpus_dir(worker), config.objective_dir());
    fuzzer.step_limit = config.difuzz.step_limit;
    fuzzer.schedule = config.difuzz.schedule;
    fuzzer.rng_seed = config.difuzz.seed.wrapping_add(worker as u64);
    fuzzer.max_input_len = DEFAULT_MAX_INPUT_LEN;
    WorkerSettings {
        fuzzer,
        sync: (config.explorer.jobs > 0).then(|| SyncSettings {
            dir: config.sync_dir(),
            import_all: config.difuzz.import_all,
        }),
        initial_corpus: config.difuzz.initial_corpus.clone(),
        log_path: config.log_dir().join(format!("fuzzer-{worker}.log")),
        time_scale: config.time_scale,
        campaign_start: shared.campaign_start,
        resume,
    }
}

fn spawn_fuzzer<'scope, 'env>(
    scope: &'scope Scope<'scope, 'env>,
    shared: &'scope Shared<'env>,
    worker: usize,
    resume: bool,
) -> ScopedJoinHandle<'scope, Result<WorkerSummary>> {
    let settings = fuzzer_settings(shared, worker, resume);
    thread::Builder::new()
        .name(format!("fuzzer-{worker}"))
        .spawn_scoped(scope, move || {
            run_fuzzer_worker(shared.program, shared.analysis, &settings, &shared.stop_workers)
        })
        .expect("spawn fuzzer thread")
}

fn explorer_loop(shared: &Shared, worker: usize, jobs: Receiver<ExplorerJob>, done: Sender<ExplorerDone>) -> Result<()> {
    let log_path = shared.config.log_dir().join(format!("explorer-{worker}.log"));
    let mut log = EventLog::open(&log_path)?;
    let sync_dir = shared.config.sync_dir();
    while let Ok(job) = jobs.recv() {
        let seed_name = file_name(&job.seed);
        let result = std::fs::read(&job.seed).at(&job.seed).and_then(|bytes| {
            run_explorer_until(
                &seed_name,
                &bytes,
                shared.program,
                &sync_dir,
                &shared.config.budget,
                shared.config.difuzz.step_limit,
                &shared.stop_workers,
            )
        });
        match &result {
            Ok(r) => {
                for g in &r.generated {
                    log.emit(&ExplorerEvent::Generated {
                        worker,
                        seed: job.seed.clone(),
                        file: g.path.clone(),
                        inverted_index: g.inverted_index,
                        kind: g.kind,
                    })
                    .at(&log_path)?;
                }
                log.emit(&ExplorerEvent::Run {
                    worker,
                    seed: job.seed.clone(),
                    attempted: r.attempted,
                    generated: r.generated.len(),
                    unsat: r.unsat,
                    budget_exceeded: r.budget_exceeded,
                    solve_ms: r.solve_time.as_millis() as u64,
                })
                .at(&log_path)?;
            }
            Err(e) => log
                .emit(&ExplorerEvent::Failed {
                    worker,
                    seed: job.seed.clone(),
                    error: e.to_string(),
                })
                .at(&log_path)?,
        }
        let msg = ExplorerDone {
            worker,
            result: result.map_err(|e| e.to_string()),
        };
        if done.send(msg).is_err() {
            break;
        }
    }
    Ok(())
}

struct ExplorerSlot<'scope> {
    jobs: Option<Sender<ExplorerJob>>,
    handle: Option<ScopedJoinHandle<'scope, Result<()>>>,
    busy: bool,
}

fn spawn_explorer<'scope, 'env>(
    scope: &'scope Scope<'scope, 'env>,
    shared: &'scope Shared<'env>,
    worker: usize,
    done: Sender<ExplorerDone>,
) -> ExplorerSlot<'scope> {
    let (tx, rx) = mpsc::channel();
    let handle = thread::Builder::new()
        .name(format!("explorer-{worker}"))
        .spawn_scoped(scope, move || explorer_loop(shared, worker, rx, done))
        .expect("spawn explorer thread");
    ExplorerSlot {
        jobs: Some(tx),
        handle: Some(handle),
        busy: false,
    }
}

fn describe_exit<T>(joined: thread::Result<Result<T>>) -> String {
    match joined {
        Ok(Ok(_)) => "exited early".into(),
        Ok(Err(e)) => e.to_string(),
        Err(_) => "panicked".into(),
    }
}

/// Runs a campaign until a stop condition holds or `interrupt` is raised,
/// then minimizes and sorts the objectives and writes `report.json`.
/// Zero explorer jobs gives pure directed fuzzing.
pub fn run_hybrid(config: &HybridConfig, interrupt: &AtomicBool) -> Result<FinalReport> {
    let program = config.program()?;
    let analysis = TargetAnalysis::run(&program);
    for u in &analysis.unreachable {
        warn!("target {} ({}) is unreachable: {}", u.target.id, u.target.location, u.reason);
    }
    prepare_work_dir(config)?;

    let shared = Shared {
        config,
        program: &program,
        analysis: &analysis,
        campaign_start: Instant::now(),
        stop_workers: AtomicBool::new(false),
    };
    let (outcome, observed, totals, restarts) = thread::scope(|s| orchestrate(s, &shared, interrupt));
    let (reason, execs) = outcome?;
    let elapsed = shared.campaign_start.elapsed();

    info!(
        "stopped ({reason}) after {:.1}s: corpus {}, objectives {}, {execs} execs",
        elapsed.as_secs_f64(),
        observed.corpus(),
        observed.objectives
    );
    let reached: Vec<String> = observed.first_reach_ms.keys().cloned().collect();
    info!("reached targets: {reached:?}");

    let before = list_seed_files(&config.objective_dir())?.len();
    let minimized = minimize_objectives(&config.objective_dir())?;
    sort_objectives(&minimized.kept, program.targets(), &config.sorted_dir())?;
    info!("objectives: kept {}, archived {}", minimized.kept_count(), minimized.archived.len());

    let corpus_size = (0..config.difuzz.jobs)
        .map(|i| list_seed_files(&config.corpus_dir(i)).map(|v| v.len()))
        .sum::<Result<usize>>()?;
    let report = FinalReport {
        mode: if config.explorer.jobs == 0 { "pure" } else { "hybrid" }.into(),
        schedule: match config.difuzz.schedule {
            Schedule::EtsPriority => "ets",
            Schedule::Annealing(_) => "annealing",
        }
        .into(),
        stop_reason: reason.to_string(),
        elapsed_secs: elapsed.as_secs_f64(),
        clock_scale: config.time_scale.factor(),
        workers: WorkerCensus {
            fuzzers: config.difuzz.jobs,
            explorers: config.explorer.jobs,
            restarts,
        },
        targets: program
            .targets()
            .iter()
            .map(|t| TargetReport {
                id: t.id.clone(),
                location: t.location.clone(),
                first_reach_secs: observed.first_reach_ms.get(&t.location).copied().map(ms_to_secs),
            })
            .collect(),
        reached_targets: reached,
        first_crash_secs: observed.first_crash_ms.map(ms_to_secs),
        execs,
        corpus_size,
        objectives_before_minimization: before,
        objectives_after_minimization: minimized.kept_count(),
        explorer: totals,
    };
    let path = config.report_path();
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    std::fs::write(&path, json).at(&path)?;
    Ok(report)
}

type Orchestrated = (Result<(StopReason, u64)>, Observed, ExplorerTotals, usize);

fn orchestrate<'scope, 'env>(
    s: &'scope Scope<'scope, 'env>,
    shared: &'scope Shared<'env>,
    interrupt: &AtomicBool,
) -> Orchestrated {
    let config = shared.config;
    let scale = config.time_scale;
    let mut observed = Observed::default();
    let mut totals = ExplorerTotals::default();
    let mut restarts = 0usize;

    let mut fuzzers: Vec<Option<ScopedJoinHandle<'scope, Result<WorkerSummary>>>> =
        (0..config.difuzz.jobs).map(|i| Some(spawn_fuzzer(s, shared, i, false))).collect();
    let mut fuzzer_restarts = vec![0usize; config.difuzz.jobs];
    let mut tails: Vec<LogTail> = (0..config.difuzz.jobs)
        .map(|i| LogTail::new(config.log_dir().join(format!("fuzzer-{i}.log"))))
        .collect();

    let (done_tx, done_rx) = mpsc::channel::<ExplorerDone>();
    let mut explorers: Vec<ExplorerSlot<'scope>> =
        (0..config.explorer.jobs).map(|i| spawn_explorer(s, shared, i, done_tx.clone())).collect();
    let mut explorer_failures = vec![0usize; config.explorer.jobs];

    let shutdown = |fuzzers: &mut Vec<Option<ScopedJoinHandle<'scope, Result<WorkerSummary>>>>,
                    explorers: &mut Vec<ExplorerSlot<'scope>>| {
        shared.stop_workers.store(true, Ordering::Relaxed);
        let mut execs = 0;
        for h in fuzzers.iter_mut().filter_map(Option::take) {
            if let Ok(Ok(summary)) = h.join() {
                execs += summary.execs;
            }
        }
        for slot in explorers.iter_mut() {
            slot.jobs = None;
            if let Some(h) = slot.handle.take() {
                let _ = h.join();
            }
        }
        execs
    };

    // Startup: every client must report readiness.
    let ready_deadline = Instant::now() + READY_TIMEOUT;
    while observed.ready.len() < config.difuzz.jobs {
        for t in tails.iter_mut() {
            for ev in t.read_new() {
                observed.apply(ev);
            }
        }
        if let Some(i) = fuzzers.iter().position(|h| h.as_ref().is_some_and(|h| h.is_finished())) {
            let why = describe_exit(fuzzers[i].take().unwrap().join());
            shutdown(&mut fuzzers, &mut explorers);
            return (
                Err(Error::Config(format!("fuzzer client {i} failed to start: {why}"))),
                observed,
                totals,
                restarts,
            );
        }
        if Instant::now() >= ready_deadline {
            shutdown(&mut fuzzers, &mut explorers);
            return (
                Err(Error::Config("fuzzer clients did not start in time".into())),
                observed,
                totals,
                restarts,
            );
        }
        thread::sleep(Duration::from_millis(5));
    }
    info!(
        "{} fuzzer clients ready, {} explorer workers",
        config.difuzz.jobs, config.explorer.jobs
    );

    let mut queue = SeedQueue::new();
    let mut seen: HashSet<PathBuf> = HashSet::new();
    let refresh_queue = |queue: &mut SeedQueue, seen: &mut HashSet<PathBuf>| {
        if config.explorer.jobs == 0 {
            return;
        }
        for i in 0..config.difuzz.jobs {
            if let Err(e) = enqueue_corpus_updates(queue, &config.corpus_dir(i), seen) {
                warn!("queue update for client {i}: {e}");
            }
        }
    };
    refresh_queue(&mut queue, &mut seen);

    let status_every = scale.to_wall(STATUS_SECS);
    let update_every = scale.to_wall(QUEUE_UPDATE_SECS);
    let mut next_status = Instant::now() + status_every;
    let mut next_update = Instant::now() + update_every;
    let mut best_coverage = 0usize;
    let mut last_growth = Instant::now();
    let stats_path = config.log_dir().join("stats.log");
    let jsonl_path = config.log_dir().join("stats.jsonl");

    let reason = 'run: loop {
        // Dispatch the best seeds to idle explorers.
        for slot in explorers.iter_mut().filter(|e| !e.busy) {
            let Some(PriorityEntry { seed_path, .. }) = queue.pop() else {
                break;
            };
            if let Some(tx) = &slot.jobs {
                if tx.send(ExplorerJob { seed: seed_path }).is_ok() {
                    slot.busy = true;
                }
            }
        }

        let wait = next_status.saturating_duration_since(Instant::now());
        match done_rx.recv_timeout(wait) {
            Ok(done) => {
                explorers[done.worker].busy = false;
                match done.result {
                    Ok(r) => {
                        totals.runs += 1;
                        totals.generated += r.generated.len();
                        totals.full += r.generated.iter().filter(|g| g.kind == SolutionKind::Full).count();
                        totals.optimistic += r.generated.iter().filter(|g| g.kind == SolutionKind::Optimistic).count();
                    }
                    Err(e) => {
                        warn!("explorer {}: {e}", done.worker);
                        totals.failures += 1;
                        explorer_failures[done.worker] += 1;
                        if explorer_failures[done.worker] > MAX_RESTARTS {
                            break 'run StopReason::WorkerFailure;
                        }
                    }
                }
                continue;
            }
            Err(RecvTimeoutError::Timeout | RecvTimeoutError::Disconnected) => {}
        }
        if Instant::now() < next_status {
            continue;
        }
        next_status += status_every;

        // Second-granularity: parse client logs, check health and stop.
        for t in tails.iter_mut() {
            for ev in t.read_new() {
                observed.apply(ev);
            }
        }
        let coverage = observed.coverage();
        if coverage > best_coverage {
            best_coverage = coverage;
            last_growth = Instant::now();
        }

        for i in 0..fuzzers.len() {
            if !fuzzers[i].as_ref().is_some_and(|h| h.is_finished()) {
                continue;
            }
            let why = describe_exit(fuzzers[i].take().unwrap().join());
            fuzzer_restarts[i] += 1;
            if fuzzer_restarts[i] > MAX_RESTARTS {
                warn!("fuzzer client {i}: {why}; giving up");
                break 'run StopReason::WorkerFailure;
            }
            warn!("fuzzer client {i}: {why}; restarting");
            restarts += 1;
            fuzzers[i] = Some(spawn_fuzzer(s, shared, i, true));
        }
        for i in 0..explorers.len() {
            if !explorers[i].handle.as_ref().is_some_and(|h| h.is_finished()) {
                continue;
            }
            let why = describe_exit(explorers[i].handle.take().unwrap().join());
            explorer_failures[i] += 1;
            if explorer_failures[i] > MAX_RESTARTS {
                warn!("explorer {i}: {why}; giving up");
                break 'run StopReason::WorkerFailure;
            }
            warn!("explorer {i}: {why}; restarting");
            restarts += 1;
            explorers[i] = spawn_explorer(s, shared, i, done_tx.clone());
        }

        if interrupt.load(Ordering::Relaxed) {
            break 'run StopReason::Interrupted;
        }
        let stats = RunStats {
            elapsed: shared.campaign_start.elapsed(),
            since_coverage_growth: last_growth.elapsed(),
            reached: observed.first_reach_ms.keys().cloned().collect(),
        };
        if let StopDecision::Stop(reason) = check_stop(&stats, &config.stop, shared.program.targets()) {
            break 'run reason;
        }

        // Minute-granularity: queue refresh and statistics.
        if Instant::now() >= next_update {
            next_update += update_every;
            refresh_queue(&mut queue, &mut seen);
            let record = StatsRecord {
                elapsed_secs: stats.elapsed.as_secs_f64(),
                corpus: observed.corpus(),
                objectives: observed.objectives,
                exec_per_sec: observed.exec_per_sec(),
                last_objective_secs: observed.last_objective_ms.map(ms_to_secs),
                queue: queue.len(),
                reached_targets: stats.reached.iter().cloned().collect(),
            };
            if let Err(e) = write_stats(&stats_path, &jsonl_path, &record) {
                warn!("statistics: {e}");
            }
        }
    };

    drop(done_tx);
    let execs = shutdown(&mut fuzzers, &mut explorers);
    while let Ok(done) = done_rx.try_recv() {
        if let Ok(r) = done.result {
            totals.runs += 1;
            totals.generated += r.generated.len();
            totals.full += r.generated.iter().filter(|g| g.kind == SolutionKind::Full).count();
            totals.optimistic += r.generated.iter().filter(|g| g.kind == SolutionKind::Optimistic).count();
        }
    }
    for t in tails.iter_mut() {
        for ev in t.read_new() {
            observed.apply(ev);
        }
    }
    (Ok((reason, execs)), observed, totals, restarts)
}

fn write_stats(text_path: &Path, jsonl_path: &Path, r: &StatsRecord) -> Result<()> {
    use std::io::Write;
    let line = format!(
        "[{:>8.1}s] corpus {} objectives {} exec/s {:.0} last objective {} queue {} targets {:?}\n",
        r.elapsed_secs,
        r.corpus,
        r.objectives,
        r.exec_per_sec,
        r.last_objective_secs.map_or("-".to_string(), |t| format!("{t:.1}s")),
        r.queue,
        r.reached_targets
    );
    info!("{}", line.trim_end());
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(text_path).at(text_path)?;
    f.write_all(line.as_bytes()).at(text_path)?;
    EventLog::open(jsonl_path)?.emit(r).at(jsonl_path)?;
    Ok(())
}
