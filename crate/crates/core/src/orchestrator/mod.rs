//! Campaign orchestration: configuration, the explorer's seed queue, stop
//! conditions, synchronization cadence and objective triage.

mod campaign;
mod config;
mod queue;
mod stop;
mod sync;
mod triage;

pub use campaign::{
    run_hybrid, ExplorerEvent, ExplorerTotals, FinalReport, StatsRecord, TargetReport, WorkerCensus, MAX_RESTARTS,
    QUEUE_UPDATE_SECS, READY_TIMEOUT, STATUS_SECS,
};
pub use config::{load_config, parse_config_str, DifuzzTable, ExplorerTable, HybridConfig, StopConditions};
pub use queue::{compare_priority, creation_millis, enqueue_corpus_updates, file_score, PriorityEntry, SeedQueue};
pub use stop::{check_stop, RunStats, StopDecision, StopReason};
pub use sync::{next_sync_interval, BASE_SYNC_INTERVAL_SECS, SYNC_COST_FACTOR};
pub use triage::{
    destinations, minimize_objectives, sanitize_location, sort_objectives, Minimization, ObjectiveRecord, SortReport,
    ARCHIVE_DIR, CRASH_DIR, TIMEOUT_DIR,
};
