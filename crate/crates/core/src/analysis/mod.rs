//! Static analysis over a [`ProgramModel`](crate::program::ProgramModel):
//! call graph, dominators, enhanced target sequences and distance maps.

mod callgraph;
mod distance;
mod dominators;
mod ets;

use std::collections::BTreeSet;

use serde::Serialize;

pub use callgraph::{build_call_graph, CallEdge, CallGraph};
pub use distance::{compute_distance_map, interprocedural_successors, seed_distance, DistanceMap};
pub use dominators::{compute_dominators, BlockDominators, DominatorMap};
pub use ets::{build_ets, EnhancedTargetSequence};

use crate::program::{BlockId, ProgramModel, TargetPoint};

/// A target the analysis could not build a sequence for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnreachableTarget {
    pub target: TargetPoint,
    pub reason: String,
}

/// Everything the fuzzer needs from static analysis, computed once per
/// program and target list.
#[derive(Debug, Clone, Serialize)]
pub struct TargetAnalysis {
    pub ets: Vec<EnhancedTargetSequence>,
    pub unreachable: Vec<UnreachableTarget>,
    pub distances: DistanceMap,
}

impl TargetAnalysis {
    /// Analyses the program's own targets.
    pub fn run(program: &ProgramModel) -> Self {
        let call_graph = build_call_graph(program);
        let dominators = DominatorMap::compute(program);
        let mut ets = Vec::new();
        let mut unreachable = Vec::new();
        for t in program.targets() {
            match build_ets(program, t, &call_graph, &dominators) {
                Ok(seq) => ets.push(seq),
                Err(e) => unreachable.push(UnreachableTarget {
                    target: t.clone(),
                    reason: e.to_string(),
                }),
            }
        }
        TargetAnalysis {
            ets,
            unreachable,
            distances: compute_distance_map(program, program.targets()),
        }
    }

    /// Union of all ETS member blocks.
    pub fn ets_blocks(&self) -> BTreeSet<BlockId> {
        self.ets
            .iter()
            .flat_map(|e| e.member_blocks.iter().copied())
            .collect()
    }
}
