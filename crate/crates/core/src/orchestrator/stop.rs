use std::collections::BTreeSet;
use std::fmt;
use std::time::Duration;

use serde::{Serialize, Serializer};

use super::config::StopConditions;
use crate::program::TargetPoint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopReason {
    MaxDuration,
    Stall,
    AllTargets,
    WorkerFailure,
    Interrupted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MaxDuration => "max duration",
            StopReason::Stall => "stall",
            StopReason::AllTargets => "all targets",
            StopReason::WorkerFailure => "worker failure",
            StopReason::Interrupted => "interrupted",
        })
    }
}

impl Serialize for StopReason {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Stop(StopReason),
}

/// What the stop check looks at.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub elapsed: Duration,
    pub since_coverage_growth: Duration,
    /// Union of reached target locations over all workers.
    pub reached: BTreeSet<String>,
}

pub fn check_stop(stats: &RunStats, stop: &StopConditions, targets: &[TargetPoint]) -> StopDecision {
    if stop.stop_on_all_targets && !targets.is_empty() && targets.iter().all(|t| stats.reached.contains(&t.location)) {
        return StopDecision::Stop(StopReason::AllTargets);
    }
    if stop.max_duration.is_some_and(|d| stats.elapsed >= d) {
        return StopDecision::Stop(StopReason::MaxDuration);
    }
    if stop.stall_duration.is_some_and(|d| stats.since_coverage_growth >= d) {
        return StopDecision::Stop(StopReason::Stall);
    }
    StopDecision::Continue
}
