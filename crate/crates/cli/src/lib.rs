//! Subcommand implementations behind the `hyfuzz` binary.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::AtomicBool;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use hyfuzz::analysis::TargetAnalysis;
use hyfuzz::fuzzer::{AnnealingParams, Schedule};
use hyfuzz::orchestrator::{
    load_config, minimize_objectives, run_hybrid, sort_objectives, FinalReport, HybridConfig,
};
use hyfuzz::{parse_program, ProgramModel, TargetPoint};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Hybrid,
    Pure,
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hybrid" => Ok(RunMode::Hybrid),
            "pure" => Ok(RunMode::Pure),
            _ => Err(format!("unknown mode {s:?} (expected hybrid or pure)")),
        }
    }
}

/// Runs a campaign from a configuration file. `out` replaces the work
/// directory and `seed` the fuzzer seed.
pub fn cmd_run(
    config_path: &Path,
    mode: RunMode,
    out: Option<&Path>,
    seed: Option<u64>,
    interrupt: &AtomicBool,
) -> Result<FinalReport> {
    let mut config = load_config(config_path).with_context(|| format!("loading {}", config_path.display()))?;
    if let Some(out) = out {
        config.difuzz.path = out.to_path_buf();
    }
    if let Some(seed) = seed {
        config.difuzz.seed = seed;
    }
    if mode == RunMode::Pure {
        config.explorer.jobs = 0;
    }
    Ok(run_hybrid(&config, interrupt)?)
}

pub fn load_program(path: &Path) -> Result<ProgramModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Parses `id=location`.
pub fn parse_target(s: &str) -> std::result::Result<TargetPoint, String> {
    match s.split_once('=') {
        Some((id, loc)) if !id.is_empty() && !loc.is_empty() => Ok(TargetPoint::new(id, loc)),
        _ => Err(format!("expected ID=FILE:LINE, got {s:?}")),
    }
}

/// ETS and distance map for the program's targets, or for `targets` when
/// given. Fails only when no target is reachable.
pub fn cmd_analyze(program_path: &Path, targets: &[TargetPoint]) -> Result<serde_json::Value> {
    let mut program = load_program(program_path)?;
    if !targets.is_empty() {
        program = program.with_targets(targets.to_vec())?;
    }
    let analysis = TargetAnalysis::run(&program);
    let value = serde_json::to_value(&analysis)?;
    if analysis.ets.is_empty() && !analysis.unreachable.is_empty() {
        bail!(
            "no target is reachable:\n{}",
            serde_json::to_string_pretty(&value["unreachable"])?
        );
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriageSummary {
    pub kept: usize,
    pub archived: usize,
}

impl fmt::Display for TriageSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "kept {}, archived {}", self.kept, self.archived)
    }
}

/// Minimizes `objective_dir` in place and sorts the survivors into
/// `out_dir`.
pub fn cmd_triage(objective_dir: &Path, targets: &[TargetPoint], out_dir: &Path) -> Result<TriageSummary> {
    if !objective_dir.is_dir() {
        bail!("{} is not a directory", objective_dir.display());
    }
    let m = minimize_objectives(objective_dir)?;
    sort_objectives(&m.kept, targets, out_dir)?;
    Ok(TriageSummary {
        kept: m.kept_count(),
        archived: m.archived.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BenchMode {
    Hybrid,
    Pure,
    /// Pure fuzzing with the simulated-annealing power schedule.
    Annealing,
}

impl BenchMode {
    pub const ALL: [BenchMode; 3] = [BenchMode::Hybrid, BenchMode::Pure, BenchMode::Annealing];

    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Hybrid => "hybrid",
            BenchMode::Pure => "pure",
            BenchMode::Annealing => "annealing",
        }
    }
}

impl FromStr for BenchMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        BenchMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown benchmark mode {s:?}"))
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub program: PathBuf,
    /// Overrides the program's own targets when non-empty.
    pub targets: Vec<TargetPoint>,
    pub repetitions: usize,
    pub timeout: Duration,
    pub modes: Vec<BenchMode>,
    /// Repetition `r` (1-based) uses seed `seed + r - 1` in every mode.
    pub seed: u64,
    /// Each run gets `<work_root>/<mode>-<rep>`.
    pub work_root: PathBuf,
    pub clock_scale: Option<f64>,
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        if self.timeout.is_zero() {
            bail!("timeout must be positive");
        }
        if self.modes.is_empty() {
            bail!("no benchmark modes selected");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRun {
    pub mode: BenchMode,
    pub repetition: usize,
    pub work_dir: PathBuf,
    pub report: FinalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub mode: String,
    /// 1-based, or `best` in summary rows.
    pub repetition: String,
    pub target_id: String,
    pub tte_seconds: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOutcome {
    pub runs: Vec<BenchRun>,
}

impl BenchOutcome {
    pub fn tte(&self, mode: BenchMode, target_id: &str) -> Vec<Option<f64>> {
        self.runs
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.report.first_reach(target_id))
            .collect()
    }

    /// One row per run and target, then a best-of-N row per mode and
    /// target.
    pub fn rows(&self) -> Vec<BenchRow> {
        let mut rows = Vec::new();
        let mut modes: Vec<BenchMode> = Vec::new();
        for r in &self.runs {
            if !modes.contains(&r.mode) {
                modes.push(r.mode);
            }
            for t in &r.report.targets {
                rows.push(BenchRow {
                    mode: r.mode.name().into(),
                    repetition: r.repetition.to_string(),
                    target_id: t.id.clone(),
                    tte_seconds: t.first_reach_secs,
                });
            }
        }
        let target_ids: Vec<String> = self
            .runs
            .first()
            .map(|r| r.report.targets.iter().map(|t| t.id.clone()).collect())
            .unwrap_or_default();
        for mode in modes {
            for id in &target_ids {
                let best = self.tte(mode, id).into_iter().flatten().min_by(f64::total_cmp);
                rows.push(BenchRow {
                    mode: mode.name().into(),
                    repetition: "best".into(),
                    target_id: id.clone(),
                    tte_seconds: best,
                });
            }
        }
        rows
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn bench_config(spec: &BenchmarkSpec, mode: BenchMode, repetition: usize) -> Result<HybridConfig> {
    let work_dir = spec.work_root.join(format!("{}-{repetition}", mode.name()));
    let mut config = HybridConfig::new(&spec.program, work_dir);
    config.targets = spec.targets.clone();
    config.difuzz.seed = spec.seed.wrapping_add(repetition as u64 - 1);
    config.stop.max_duration = Some(spec.timeout);
    config.stop.stop_on_all_targets = true;
    if let Some(scale) = spec.clock_scale {
        config.time_scale =
            hyfuzz::clock::TimeScale::new(scale).with_context(|| format!("invalid clock scale {scale}"))?;
    }
    match mode {
        BenchMode::Hybrid => {}
        BenchMode::Pure => config.explorer.jobs = 0,
        BenchMode::Annealing => {
            config.explorer.jobs = 0;
            config.difuzz.schedule = Schedule::Annealing(AnnealingParams {
                total_budget: spec.timeout,
                ..AnnealingParams::default()
            });
        }
    }
    Ok(config)
}

/// Runs every mode for every repetition, one campaign at a time.
pub fn cmd_bench(spec: &BenchmarkSpec, interrupt: &AtomicBool) -> Result<BenchOutcome> {
    spec.validate()?;
    let mut outcome = BenchOutcome::default();
    for &mode in &spec.modes {
        for repetition in 1..=spec.repetitions {
            let config = bench_config(spec, mode, repetition)?;
            let report = run_hybrid(&config, interrupt)
                .with_context(|| format!("{} run {repetition}", mode.name()))?;
            log::info!(
                "{} run {repetition}: {:?}",
                mode.name(),
                report.targets.iter().map(|t| t.first_reach_secs).collect::<Vec<_>>()
            );
            outcome.runs.push(BenchRun {
                mode,
                repetition,
                work_dir: config.difuzz.path.clone(),
                report,
            });
        }
    }
    Ok(outcome)
}
