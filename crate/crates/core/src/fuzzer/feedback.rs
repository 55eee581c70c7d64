use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::analysis::EnhancedTargetSequence;
use crate::program::{BlockId, ExecutionTrace, Outcome};

/// Membership index over the union of all ETS blocks.
#[derive(Debug, Clone, Default)]
pub struct EtsIndex {
    blocks: HashSet<BlockId>,
}

impl EtsIndex {
    pub fn new(ets_list: &[EnhancedTargetSequence]) -> Self {
        EtsIndex {
            blocks: ets_list
                .iter()
                .flat_map(|e| e.member_blocks.iter().copied())
                .collect(),
        }
    }

    pub fn contains(&self, block: BlockId) -> bool {
        self.blocks.contains(&block)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// The trace restricted to ETS blocks. A block repeated back to back in
    /// the execution is kept once; repeats separated by other blocks stay.
    pub fn ets_trace(&self, trace: &ExecutionTrace) -> Vec<BlockId> {
        let mut out: Vec<BlockId> = Vec::new();
        let mut prev = None;
        for &b in &trace.block_sequence {
            if prev != Some(b) && self.contains(b) {
                out.push(b);
            }
            prev = Some(b);
        }
        out
    }

    /// Returns whether the trace touches an ETS block not in `seen`, and
    /// the ETS trace. `seen` is updated.
    pub fn feedback(&self, trace: &ExecutionTrace, seen: &mut HashSet<BlockId>) -> (bool, Vec<BlockId>) {
        let ets_trace = self.ets_trace(trace);
        let mut novel = false;
        for &b in &ets_trace {
            novel |= seen.insert(b);
        }
        (novel, ets_trace)
    }
}

pub fn ets_feedback(
    trace: &ExecutionTrace,
    ets_list: &[EnhancedTargetSequence],
    ets_seen: &mut HashSet<BlockId>,
) -> (bool, Vec<BlockId>) {
    EtsIndex::new(ets_list).feedback(trace, ets_seen)
}

/// True when the trace covers a block outside `coverage`; `coverage` is updated.
pub fn map_feedback(trace: &ExecutionTrace, coverage: &mut HashSet<BlockId>) -> bool {
    let mut novel = false;
    for &b in &trace.block_sequence {
        novel |= coverage.insert(b);
    }
    novel
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    TargetReach,
    Crash,
    Timeout,
}

/// Crash and timeout outrank target reach.
pub fn classify_objective(trace: &ExecutionTrace) -> Option<ObjectiveKind> {
    match trace.outcome {
        Outcome::Crash => Some(ObjectiveKind::Crash),
        Outcome::Timeout => Some(ObjectiveKind::Timeout),
        Outcome::Ok if !trace.reached_targets.is_empty() => Some(ObjectiveKind::TargetReach),
        Outcome::Ok => None,
    }
}
