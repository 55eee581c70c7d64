//! Campaign configuration. The document has an `[explorer]` table (also
//! accepted as `[sydr]`), a `[difuzz]` table, optional `[[target]]`,
//! `[stop]`, `[budget]` and `[timing]` tables.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::clock::TimeScale;
use crate::error::{Error, IoContext, Result};
use crate::explorer::ExplorerBudget;
use crate::fuzzer::{AnnealingParams, Schedule, DEFAULT_STEP_LIMIT};
use crate::program::{parse_program, ProgramModel, TargetPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct ExplorerTable {
    pub args: String,
    pub target: PathBuf,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifuzzTable {
    pub target: PathBuf,
    pub args: String,
    /// Work directory.
    pub path: PathBuf,
    pub jobs: usize,
    pub initial_corpus: Option<PathBuf>,
    /// Targets file given with `-e`.
    pub targets_file: Option<PathBuf>,
    pub schedule: Schedule,
    pub import_all: bool,
    pub seed: u64,
    pub step_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StopConditions {
    pub max_duration: Option<Duration>,
    /// Time without coverage growth.
    pub stall_duration: Option<Duration>,
    pub stop_on_all_targets: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    pub explorer: ExplorerTable,
    pub difuzz: DifuzzTable,
    pub targets: Vec<TargetPoint>,
    pub budget: ExplorerBudget,
    pub stop: StopConditions,
    pub time_scale: TimeScale,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(alias = "sydr")]
    explorer: Option<RawExplorer>,
    difuzz: Option<RawDifuzz>,
    #[serde(default, rename = "target")]
    targets: Vec<TargetPoint>,
    #[serde(default)]
    stop: RawStop,
    budget: Option<RawBudget>,
    timing: Option<RawTiming>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExplorer {
    #[serde(default)]
    args: String,
    target: String,
    jobs: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDifuzz {
    target: String,
    #[serde(default)]
    args: String,
    path: String,
    jobs: Option<i64>,
    step_limit: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawStop {
    max_duration_secs: Option<f64>,
    stall_secs: Option<f64>,
    #[serde(default)]
    stop_on_all_targets: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    per_run_secs: Option<f64>,
    per_query_secs: Option<f64>,
    total_solve_secs: Option<f64>,
    max_inversions: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTiming {
    clock_scale: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTargetsFile {
    #[serde(default, rename = "target")]
    targets: Vec<TargetPoint>,
}

fn seconds(field: &str, v: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(v).map_err(|_| Error::Config(format!("{field}: invalid duration {v}")))
}

fn jobs(table: &str, v: i64) -> Result<usize> {
    if v < 1 {
        return Err(Error::Config(format!("[{table}] jobs must be at least 1, got {v}")));
    }
    Ok(v as usize)
}

/// `"/bin/prog @@"` names the program `/bin/prog`.
fn program_path(target: &str) -> PathBuf {
    let t = target.trim();
    PathBuf::from(t.strip_suffix("@@").map(str::trim_end).unwrap_or(t))
}

struct FuzzerArgs {
    jobs: Option<usize>,
    corpus: Option<PathBuf>,
    targets_file: Option<PathBuf>,
    schedule: Schedule,
    import_all: bool,
    seed: u64,
}

fn parse_fuzzer_args(args: &str) -> Result<FuzzerArgs> {
    let mut out = FuzzerArgs {
        jobs: None,
        corpus: None,
        targets_file: None,
        schedule: Schedule::default(),
        import_all: false,
        seed: 0,
    };
    let bad = |msg: String| Error::Config(format!("[difuzz] args: {msg}"));
    let mut words = args.split_whitespace();
    while let Some(w) = words.next() {
        let mut value = |flag: &str| {
            words
                .next()
                .map(str::to_string)
                .ok_or_else(|| bad(format!("{flag} needs a value")))
        };
        match w {
            "-j" => out.jobs = Some(value("-j")?.parse().map_err(|_| bad("bad -j value".into()))?),
            j if j.starts_with("-j") => {
                out.jobs = Some(j[2..].parse().map_err(|_| bad(format!("bad job count {j:?}")))?)
            }
            "-i" => out.corpus = Some(PathBuf::from(value("-i")?)),
            "-e" => out.targets_file = Some(PathBuf::from(value("-e")?)),
            "-s" | "--seed" => out.seed = value(w)?.parse().map_err(|_| bad("bad seed".into()))?,
            "--schedule" => {
                out.schedule = match value(w)?.as_str() {
                    "ets" => Schedule::EtsPriority,
                    "annealing" => Schedule::Annealing(AnnealingParams::default()),
                    other => return Err(bad(format!("unknown schedule {other:?}"))),
                }
            }
            "--import-all" => out.import_all = true,
            other => return Err(bad(format!("unknown flag {other:?}"))),
        }
    }
    if out.jobs == Some(0) {
        return Err(bad("job count must be at least 1".into()));
    }
    Ok(out)
}

/// Parses and structurally validates a configuration document. Paths are
/// returned as written; see [`load_config`] for resolution and file checks.
pub fn parse_config_str(text: &str) -> Result<HybridConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::from_toml(text, &e))?;
    let ex = raw
        .explorer
        .ok_or_else(|| Error::Config("missing [explorer] (or [sydr]) table".into()))?;
    let df = raw.difuzz.ok_or_else(|| Error::Config("missing [difuzz] table".into()))?;

    let args = parse_fuzzer_args(&df.args)?;
    let difuzz_jobs = match df.jobs {
        Some(j) => jobs("difuzz", j)?,
        None => args.jobs.unwrap_or(1),
    };

    let mut budget = ExplorerBudget::default();
    if let Some(b) = raw.budget {
        if let Some(v) = b.per_run_secs {
            budget.per_run_limit = seconds("per_run_secs", v)?;
        }
        if let Some(v) = b.per_query_secs {
            budget.per_query_limit = seconds("per_query_secs", v)?;
        }
        if let Some(v) = b.total_solve_secs {
            budget.total_solve_limit = seconds("total_solve_secs", v)?;
        }
        if let Some(v) = b.max_inversions {
            budget.max_inversions = v;
        }
    }
    budget.validate()?;

    let time_scale = match raw.timing {
        Some(t) => TimeScale::new(t.clock_scale)
            .ok_or_else(|| Error::Config(format!("clock_scale must be positive, got {}", t.clock_scale)))?,
        None => TimeScale::DEFAULT,
    };

    Ok(HybridConfig {
        explorer: ExplorerTable {
            args: ex.args,
            target: program_path(&ex.target),
            jobs: jobs("explorer", ex.jobs)?,
        },
        difuzz: DifuzzTable {
            target: program_path(&df.target),
            args: df.args,
            path: PathBuf::from(df.path),
            jobs: difuzz_jobs,
            initial_corpus: args.corpus,
            targets_file: args.targets_file,
            schedule: args.schedule,
            import_all: args.import_all,
            seed: args.seed,
            step_limit: df.step_limit.unwrap_or(DEFAULT_STEP_LIMIT),
        },
        targets: raw.targets,
        budget,
        stop: StopConditions {
            max_duration: raw.stop.max_duration_secs.map(|v| seconds("max_duration_secs", v)).transpose()?,
            stall_duration: raw.stop.stall_secs.map(|v| seconds("stall_secs", v)).transpose()?,
            stop_on_all_targets: raw.stop.stop_on_all_targets,
        },
        time_scale,
    })
}

/// Reads a configuration file, resolves relative paths against its
/// directory, merges targets from the `-e` file and checks that both tools
/// analyze the same program.
pub fn load_config(path: &Path) -> Result<HybridConfig> {
    let text = std::fs::read_to_string(path).at(path)?;
    let mut cfg = parse_config_str(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let resolve = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    resolve(&mut cfg.explorer.target);
    resolve(&mut cfg.difuzz.target);
    resolve(&mut cfg.difuzz.path);
    if let Some(p) = cfg.difuzz.initial_corpus.as_mut() {
        resolve(p);
    }
    if let Some(p) = cfg.difuzz.targets_file.as_mut() {
        resolve(p);
        let text = std::fs::read_to_string(&*p).at(&*p)?;
        let file: RawTargetsFile = toml::from_str(&text).map_err(|e| Error::from_toml(&text, &e))?;
        for t in file.targets {
            if !cfg.targets.contains(&t) {
                cfg.targets.push(t);
            }
        }
    }
    cfg.program()?;
    Ok(cfg)
}

fn read_program(path: &Path) -> Result<ProgramModel> {
    let text = std::fs::read_to_string(path).at(path)?;
    parse_program(&text).map_err(|e| match e {
        Error::Syntax { line, column, message } => Error::Config(format!(
            "{}:{line}:{column}: {message}",
            path.display()
        )),
        Error::Semantic(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl HybridConfig {
    /// One fuzzer client and one explorer worker on `program`, default
    /// budgets, no stop condition.
    pub fn new(program: impl Into<PathBuf>, work_dir: impl Into<PathBuf>) -> Self {
        let program = program.into();
        HybridConfig {
            explorer: ExplorerTable {
                args: String::new(),
                target: program.clone(),
                jobs: 1,
            },
            difuzz: DifuzzTable {
                target: program,
                args: String::new(),
                path: work_dir.into(),
                jobs: 1,
                initial_corpus: None,
                targets_file: None,
                schedule: Schedule::default(),
                import_all: false,
                seed: 0,
                step_limit: DEFAULT_STEP_LIMIT,
            },
            targets: Vec::new(),
            budget: ExplorerBudget::default(),
            stop: StopConditions::default(),
            time_scale: TimeScale::DEFAULT,
        }
    }

    /// The analyzed program with the configured targets applied. Without
    /// configured targets the program's own are used.
    pub fn program(&self) -> Result<ProgramModel> {
        let fuzz = read_program(&self.difuzz.target)?;
        if self.explorer.target != self.difuzz.target {
            let sym = read_program(&self.explorer.target)?;
            if sym.functions() != fuzz.functions() || sym.entry_function() != fuzz.entry_function() {
                return Err(Error::Config(format!(
                    "{} and {} describe different programs",
                    self.explorer.target.display(),
                    self.difuzz.target.display()
                )));
            }
        }
        if self.targets.is_empty() {
            Ok(fuzz)
        } else {
            fuzz.with_targets(self.targets.clone())
        }
    }

    pub fn corpus_dir(&self, worker: usize) -> PathBuf {
        self.difuzz.path.join("corpus").join(format!("w{worker}"))
    }

    pub fn objective_dir(&self) -> PathBuf {
        self.difuzz.path.join("objectives")
    }

    pub fn sync_dir(&self) -> PathBuf {
        self.difuzz.path.join("sync")
    }

    pub fn log_dir(&self) -> PathBuf {
        self.difuzz.path.join("logs")
    }

    pub fn sorted_dir(&self) -> PathBuf {
        self.difuzz.path.join("sorted")
    }

    pub fn report_path(&self) -> PathBuf {
        self.difuzz.path.join("report.json")
    }
}
