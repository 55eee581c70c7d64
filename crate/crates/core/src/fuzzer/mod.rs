//! The directed greybox fuzzer.

mod feedback;
mod metadata;
mod mutate;
mod schedule;
mod state;
mod worker;

pub use feedback::{classify_objective, ets_feedback, map_feedback, EtsIndex, ObjectiveKind};
pub use metadata::{sidecar_path, store_seed, SeedMetadata};
pub use mutate::{apply as apply_mutation, mutate, MutationOp, MAX_GROWTH};
pub use schedule::{energy, normalized_distance, AnnealingParams, Schedule};
pub use state::{
    CorpusEntry, Evaluation, FuzzerConfig, FuzzerState, IterationReport, ObjectiveEntry, Seed,
    SyncReport, BOOTSTRAP_INPUTS, DEFAULT_MAX_INPUT_LEN, DEFAULT_STEP_LIMIT, ETS_PRIORITY_MUTANTS,
};
pub use worker::{run_fuzzer_worker, EventLog, SyncSettings, WorkerEvent, WorkerSettings, WorkerSummary};
