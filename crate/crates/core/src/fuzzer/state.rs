use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::{debug, warn};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::feedback::{classify_objective, map_feedback, EtsIndex, ObjectiveKind};
use super::metadata::{store_seed, SeedMetadata};
use super::mutate::mutate;
use super::schedule::{energy, normalized_distance, Schedule};
use crate::analysis::{seed_distance, DistanceMap, TargetAnalysis};
use crate::error::{IoContext, Result};
use crate::fsutil::{file_name, list_seed_files};
use crate::program::{execute, BlockId, ProgramModel};

pub const DEFAULT_STEP_LIMIT: usize = 10_000;
pub const DEFAULT_MAX_INPUT_LEN: usize = 1024;
/// Random inputs generated when the corpus starts empty.
pub const BOOTSTRAP_INPUTS: usize = 8;
/// Mutants per selected seed under the ETS-priority schedule.
pub const ETS_PRIORITY_MUTANTS: usize = 64;
/// Chance of moving past the current candidate in the ranked corpus.
const SKIP_PROBABILITY: f64 = 0.5;
/// Upper bound on stacked mutations per mutant.
const MAX_STACK: usize = 4;

#[derive(Debug, Clone)]
pub struct FuzzerConfig {
    pub worker_id: usize,
    pub corpus_dir: PathBuf,
    pub objective_dir: PathBuf,
    pub step_limit: usize,
    pub schedule: Schedule,
    pub rng_seed: u64,
    pub max_input_len: usize,
}

impl FuzzerConfig {
    pub fn new(worker_id: usize, corpus_dir: impl Into<PathBuf>, objective_dir: impl Into<PathBuf>) -> Self {
        FuzzerConfig {
            worker_id,
            corpus_dir: corpus_dir.into(),
            objective_dir: objective_dir.into(),
            step_limit: DEFAULT_STEP_LIMIT,
            schedule: Schedule::EtsPriority,
            rng_seed: 0,
            max_input_len: DEFAULT_MAX_INPUT_LEN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed {
    pub bytes: Vec<u8>,
    pub file_name: String,
    /// Milliseconds since the fuzzer started.
    pub created_at: u64,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub seed: Seed,
    pub metadata: SeedMetadata,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct ObjectiveEntry {
    pub seed: Seed,
    pub metadata: SeedMetadata,
    pub kind: ObjectiveKind,
}

/// Result of executing one input and running every feedback on it.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub metadata: SeedMetadata,
    pub objective: Option<ObjectiveKind>,
    pub distance: f64,
    signature: Option<u64>,
}

#[derive(Debug, Clone, Default)]
pub struct IterationReport {
    pub execs: u64,
    pub added_to_corpus: usize,
    /// Indices into [`FuzzerState::objectives`].
    pub new_objectives: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct SyncReport {
    pub imported: usize,
    pub admitted: usize,
    pub new_objectives: Vec<usize>,
    pub duration: Duration,
}

/// In-memory state of one fuzzer worker.
pub struct FuzzerState {
    config: FuzzerConfig,
    ets: EtsIndex,
    distances: DistanceMap,
    pub corpus: Vec<CorpusEntry>,
    /// Corpus indices in selection-preference order.
    ranked: Vec<usize>,
    pub global_coverage: HashSet<BlockId>,
    pub ets_seen: HashSet<BlockId>,
    pub objectives: Vec<ObjectiveEntry>,
    objective_signatures: HashSet<u64>,
    imported: HashSet<String>,
    rng: ChaCha8Rng,
    start: Instant,
    next_seq: u64,
    max_distance: f64,
    pub execs: u64,
}

impl FuzzerState {
    pub fn new(config: FuzzerConfig, analysis: &TargetAnalysis) -> Result<Self> {
        fs::create_dir_all(&config.corpus_dir).at(&config.corpus_dir)?;
        fs::create_dir_all(&config.objective_dir).at(&config.objective_dir)?;
        Ok(FuzzerState {
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            config,
            ets: EtsIndex::new(&analysis.ets),
            distances: analysis.distances.clone(),
            corpus: Vec::new(),
            ranked: Vec::new(),
            global_coverage: HashSet::new(),
            ets_seen: HashSet::new(),
            objectives: Vec::new(),
            objective_signatures: HashSet::new(),
            imported: HashSet::new(),
            start: Instant::now(),
            next_seq: 0,
            max_distance: 0.0,
            execs: 0,
        })
    }

    pub fn config(&self) -> &FuzzerConfig {
        &self.config
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    /// Executes `bytes` and applies the ETS, map, and objective feedbacks.
    pub fn evaluate(&mut self, program: &ProgramModel, bytes: &[u8]) -> Evaluation {
        self.execs += 1;
        let trace = execute(program, bytes, self.config.step_limit, false);
        let (is_interesting_ets, ets_trace) = self.ets.feedback(&trace, &mut self.ets_seen);
        let is_interesting_map = map_feedback(&trace, &mut self.global_coverage);
        let objective = classify_objective(&trace);

        let distance = if is_interesting_ets || is_interesting_map {
            seed_distance(&trace, &self.distances)
        } else {
            f64::INFINITY
        };
        let signature = objective.map(|kind| {
            let mut blocks = trace.block_sequence.clone();
            blocks.sort_unstable();
            blocks.dedup();
            let mut h = DefaultHasher::new();
            kind.hash(&mut h);
            blocks.hash(&mut h);
            h.finish()
        });

        Evaluation {
            metadata: SeedMetadata {
                is_interesting_ets,
                is_interesting_map,
                ets_trace,
                reached_targets: trace.reached_targets,
                is_crash: objective == Some(ObjectiveKind::Crash),
                is_timeout: objective == Some(ObjectiveKind::Timeout),
            },
            objective,
            distance,
            signature,
        }
    }

    fn next_name(&mut self) -> String {
        let name = format!("w{}-{:06}", self.config.worker_id, self.next_seq);
        self.next_seq += 1;
        name
    }

    fn new_seed(&mut self, bytes: Vec<u8>) -> Seed {
        Seed {
            file_name: self.next_name(),
            created_at: self.start.elapsed().as_millis() as u64,
            bytes,
        }
    }

    fn admit(&mut self, bytes: Vec<u8>, eval: &Evaluation) -> Result<()> {
        let seed = self.new_seed(bytes);
        store_seed(&self.config.corpus_dir, &seed.file_name, &seed.bytes, &eval.metadata)?;
        self.push_entry(CorpusEntry {
            seed,
            metadata: eval.metadata.clone(),
            distance: eval.distance,
        });
        Ok(())
    }

    fn push_entry(&mut self, entry: CorpusEntry) {
        if entry.distance.is_finite() {
            self.max_distance = self.max_distance.max(entry.distance);
        }
        let key = rank_key(&entry.metadata);
        let idx = self.corpus.len();
        self.corpus.push(entry);
        // Newer entries go before older ones with the same flags.
        let at = self
            .ranked
            .partition_point(|&i| rank_key(&self.corpus[i].metadata) < key);
        self.ranked.insert(at, idx);
    }

    fn record_objective(&mut self, bytes: Vec<u8>, eval: &Evaluation) -> Result<usize> {
        let kind = eval.objective.expect("only objectives are recorded");
        let seed = self.new_seed(bytes);
        store_seed(&self.config.objective_dir, &seed.file_name, &seed.bytes, &eval.metadata)?;
        debug!(
            "worker {}: objective {} ({kind:?}) reached {:?}",
            self.config.worker_id, seed.file_name, eval.metadata.reached_targets
        );
        self.objectives.push(ObjectiveEntry {
            seed,
            metadata: eval.metadata.clone(),
            kind,
        });
        Ok(self.objectives.len() - 1)
    }

    /// Executes one input and files it. Returns (admitted, objective index).
    fn process(&mut self, program: &ProgramModel, bytes: Vec<u8>, force_admit: bool, always_objective: bool) -> Result<(bool, Option<usize>)> {
        let eval = self.evaluate(program, &bytes);
        let mut objective = None;
        if let Some(sig) = eval.signature {
            let novel = self.objective_signatures.insert(sig);
            if novel || always_objective {
                objective = Some(self.record_objective(bytes.clone(), &eval)?);
            }
        }
        let admit = force_admit || eval.metadata.is_interesting_ets || eval.metadata.is_interesting_map;
        if admit {
            self.admit(bytes, &eval)?;
        }
        Ok((admit, objective))
    }

    /// Loads user-supplied seeds; only interesting ones enter the corpus.
    pub fn load_initial_corpus(&mut self, program: &ProgramModel, dir: &Path) -> Result<IterationReport> {
        let mut report = IterationReport::default();
        for path in list_seed_files(dir)? {
            let bytes = fs::read(&path).at(&path)?;
            let (admitted, objective) = self.process(program, bytes, false, false)?;
            report.execs += 1;
            report.added_to_corpus += usize::from(admitted);
            report.new_objectives.extend(objective);
        }
        Ok(report)
    }

    /// Rebuilds state from a corpus directory written by an earlier run of
    /// this worker, without rewriting any files.
    pub fn resume(&mut self, program: &ProgramModel) -> Result<()> {
        let prefix = format!("w{}-", self.config.worker_id);
        let mut max_seq = None;
        for dir in [&self.config.corpus_dir, &self.config.objective_dir] {
            for path in list_seed_files(dir)? {
                let name = file_name(&path);
                if let Some(seq) = name.strip_prefix(&prefix).and_then(|s| s.parse::<u64>().ok()) {
                    max_seq = max_seq.max(Some(seq));
                }
            }
        }
        self.next_seq = max_seq.map_or(0, |s| s + 1);

        for path in list_seed_files(&self.config.corpus_dir.clone())? {
            let bytes = fs::read(&path).at(&path)?;
            let eval = self.evaluate(program, &bytes);
            let metadata = SeedMetadata::load(&path).unwrap_or(eval.metadata);
            self.push_entry(CorpusEntry {
                seed: Seed {
                    bytes,
                    file_name: file_name(&path),
                    created_at: 0,
                },
                metadata,
                distance: eval.distance,
            });
        }
        Ok(())
    }

    /// Random inputs of the program's arity for an empty corpus.
    pub fn bootstrap(&mut self, program: &ProgramModel) -> Result<IterationReport> {
        let mut report = IterationReport::default();
        for _ in 0..BOOTSTRAP_INPUTS {
            let bytes: Vec<u8> = (0..program.input_arity()).map(|_| self.rng.random()).collect();
            let (admitted, objective) = self.process(program, bytes, false, false)?;
            report.execs += 1;
            report.added_to_corpus += usize::from(admitted);
            report.new_objectives.extend(objective);
        }
        Ok(report)
    }

    /// Picks a corpus seed and how many mutants to derive from it.
    fn select(&mut self) -> (usize, usize) {
        match self.config.schedule {
            Schedule::EtsPriority => {
                let mut pick = self.ranked.len() - 1;
                for (pos, _) in self.ranked.iter().enumerate() {
                    if !self.rng.random_bool(SKIP_PROBABILITY) {
                        pick = pos;
                        break;
                    }
                }
                (self.ranked[pick], ETS_PRIORITY_MUTANTS)
            }
            Schedule::Annealing(params) => {
                let elapsed = self.start.elapsed();
                let energies: Vec<f64> = self
                    .corpus
                    .iter()
                    .map(|e| energy(normalized_distance(e.distance, self.max_distance), elapsed, &params))
                    .collect();
                let idx = WeightedIndex::new(&energies)
                    .map(|w| w.sample(&mut self.rng))
                    .unwrap_or(0);
                (idx, energies[idx].round().max(1.0) as usize)
            }
        }
    }

    /// One scheduling round: select, mutate, execute, file the results.
    pub fn fuzz_iteration(&mut self, program: &ProgramModel) -> Result<IterationReport> {
        if self.corpus.is_empty() {
            return self.bootstrap(program);
        }
        let mut report = IterationReport::default();
        let (idx, mutants) = self.select();
        let base = self.corpus[idx].seed.bytes.clone();
        for _ in 0..mutants {
            let mut input = base.clone();
            let stack = self.rng.random_range(1..=MAX_STACK);
            for _ in 0..stack {
                let partner = self.rng.random_range(0..self.corpus.len());
                input = mutate(&input, &mut self.rng, Some(&self.corpus[partner].seed.bytes));
            }
            input.truncate(self.config.max_input_len);
            let (admitted, objective) = self.process(program, input, false, false)?;
            report.execs += 1;
            report.added_to_corpus += usize::from(admitted);
            report.new_objectives.extend(objective);
        }
        Ok(report)
    }

    /// Imports files the explorer left in `sync_dir` that were not seen
    /// before. With `import_all` every file enters the corpus; otherwise
    /// only interesting ones do. Objectives are always recorded.
    pub fn sync_from_dir(&mut self, program: &ProgramModel, sync_dir: &Path, import_all: bool) -> Result<SyncReport> {
        let started = Instant::now();
        let mut report = SyncReport::default();
        for path in list_seed_files(sync_dir)? {
            let name = file_name(&path);
            if self.imported.contains(&name) {
                continue;
            }
            let bytes = match fs::read(&path) {
                Ok(b) => b,
                Err(e) => {
                    warn!("skipping unreadable sync file {}: {e}", path.display());
                    continue;
                }
            };
            self.imported.insert(name);
            let (admitted, objective) = self.process(program, bytes, import_all, true)?;
            report.imported += 1;
            report.admitted += usize::from(admitted);
            report.new_objectives.extend(objective);
        }
        report.duration = started.elapsed();
        Ok(report)
    }
}

/// Sort key for the ETS-priority order: ETS-interesting first, then
/// coverage-interesting; ties keep insertion order reversed (see push_entry).
fn rank_key(meta: &SeedMetadata) -> (bool, bool) {
    (!meta.is_interesting_ets, !meta.is_interesting_map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;

    // byte0 == 'G' -> block 1 (ETS) -> byte1 == 'O' -> target crash
    const GUARDED: &str = r#"
entry_function = "main"
[[function]]
name = "main"
entry = 0
[[function.block]]
id = 0
label = "g.c:1"
term = { kind = "branch", offsets = [0], rel = "eq", value = 0x47, then = 1, else = 3 }
[[function.block]]
id = 1
label = "g.c:2"
term = { kind = "branch", offsets = [1], rel = "eq", value = 0x4f, then = 2, else = 3 }
[[function.block]]
id = 2
label = "g.c:3"
term = { kind = "crash" }
[[function.block]]
id = 3
label = "g.c:4"
term = { kind = "halt" }
[[target]]
id = "go"
location = "g.c:3"
"#;

    fn setup() -> (tempfile::TempDir, ProgramModel, FuzzerState) {
        let dir = tempfile::tempdir().unwrap();
        let program = parse_program(GUARDED).unwrap();
        let analysis = TargetAnalysis::run(&program);
        let config = FuzzerConfig::new(0, dir.path().join("corpus"), dir.path().join("objectives"));
        let state = FuzzerState::new(config, &analysis).unwrap();
        (dir, program, state)
    }

    #[test]
    fn new_ets_block_is_admitted_with_flag() {
        let (dir, program, mut state) = setup();
        state.process(&program, vec![0, 0], false, false).unwrap();
        let (admitted, _) = state.process(&program, vec![0x47, 0], false, false).unwrap();
        assert!(admitted);
        let last = state.corpus.last().unwrap();
        assert!(last.metadata.is_interesting_ets);
        let on_disk = SeedMetadata::load(&dir.path().join("corpus").join(&last.seed.file_name)).unwrap();
        assert_eq!(on_disk, last.metadata);
    }

    #[test]
    fn crashing_mutant_goes_to_objectives() {
        let (dir, program, mut state) = setup();
        let (_, objective) = state.process(&program, b"GO".to_vec(), false, false).unwrap();
        let entry = &state.objectives[objective.unwrap()];
        assert!(entry.metadata.is_crash && !entry.metadata.is_timeout);
        assert_eq!(entry.metadata.reached_targets, vec!["g.c:3"]);
        let path = dir.path().join("objectives").join(&entry.seed.file_name);
        assert_eq!(fs::read(&path).unwrap(), b"GO");
        assert!(SeedMetadata::load(&path).unwrap().is_crash);
    }

    #[test]
    fn boring_input_is_discarded() {
        let (_dir, program, mut state) = setup();
        state.process(&program, vec![1, 1], false, false).unwrap();
        let before = state.corpus.len();
        let (admitted, objective) = state.process(&program, vec![2, 2], false, false).unwrap();
        assert!(!admitted && objective.is_none());
        assert_eq!(state.corpus.len(), before);
    }

    #[test]
    fn bootstrap_fills_empty_corpus() {
        let (_dir, program, mut state) = setup();
        let report = state.fuzz_iteration(&program).unwrap();
        assert_eq!(report.execs, BOOTSTRAP_INPUTS as u64);
        assert!(!state.corpus.is_empty());
        let report = state.fuzz_iteration(&program).unwrap();
        assert_eq!(report.execs, ETS_PRIORITY_MUTANTS as u64);
    }

    #[test]
    fn sync_imports_once_and_honours_import_all() {
        let (dir, program, mut state) = setup();
        let sync = dir.path().join("sync");
        fs::create_dir_all(&sync).unwrap();
        state.process(&program, vec![0, 0], false, false).unwrap();

        fs::write(sync.join("a_inv0"), [0x47, 0]).unwrap();
        let r = state.sync_from_dir(&program, &sync, false).unwrap();
        assert_eq!((r.imported, r.admitted), (1, 1));
        let r = state.sync_from_dir(&program, &sync, false).unwrap();
        assert_eq!(r.imported, 0);

        fs::write(sync.join("b_inv0"), [0x01, 0]).unwrap();
        let corpus_before = state.corpus.len();
        let r = state.sync_from_dir(&program, &sync, true).unwrap();
        assert_eq!((r.imported, r.admitted), (1, 1));
        assert_eq!(state.corpus.len(), corpus_before + 1);
        assert!(fs::read_dir(&sync).unwrap().count() == 2);
    }

    #[test]
    fn annealing_schedule_runs() {
        let dir = tempfile::tempdir().unwrap();
        let program = parse_program(GUARDED).unwrap();
        let analysis = TargetAnalysis::run(&program);
        let mut config = FuzzerConfig::new(0, dir.path().join("c"), dir.path().join("o"));
        config.schedule = Schedule::Annealing(Default::default());
        let mut state = FuzzerState::new(config, &analysis).unwrap();
        for _ in 0..20 {
            state.fuzz_iteration(&program).unwrap();
        }
        assert!(state.execs > BOOTSTRAP_INPUTS as u64);
    }

    #[test]
    fn resume_picks_up_existing_corpus() {
        let (dir, program, mut state) = setup();
        for _ in 0..30 {
            state.fuzz_iteration(&program).unwrap();
        }
        let analysis = TargetAnalysis::run(&program);
        let config = FuzzerConfig::new(0, dir.path().join("corpus"), dir.path().join("objectives"));
        let mut again = FuzzerState::new(config, &analysis).unwrap();
        again.resume(&program).unwrap();
        assert_eq!(again.corpus.len(), state.corpus.len());
        assert_eq!(again.global_coverage, state.global_coverage);
        let fresh = again.next_name();
        assert!(!dir.path().join("corpus").join(&fresh).exists());
    }
}
