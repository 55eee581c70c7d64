use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::program::{BlockId, ExecutionTrace, ProgramModel, TargetPoint, Terminator};

/// Unit-weight distance from every block to the nearest target block over
/// the interprocedural CFG. `None` marks blocks that cannot reach a target.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistanceMap {
    distances: BTreeMap<BlockId, Option<u32>>,
}

impl DistanceMap {
    pub fn get(&self, block: BlockId) -> Option<u32> {
        self.distances.get(&block).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (BlockId, Option<u32>)> + '_ {
        self.distances.iter().map(|(&b, &d)| (b, d))
    }

    pub fn max_finite(&self) -> Option<u32> {
        self.distances.values().flatten().copied().max()
    }
}

/// Interprocedural successors: intra-procedural edges, call site to callee
/// entry, and callee `Return` blocks to each caller's return block.
pub fn interprocedural_successors(program: &ProgramModel) -> BTreeMap<BlockId, Vec<BlockId>> {
    let mut return_blocks: BTreeMap<&str, Vec<BlockId>> = BTreeMap::new();
    for b in program.blocks() {
        if let Terminator::Call {
            function,
            return_block,
        } = &b.terminator
        {
            return_blocks.entry(function).or_default().push(*return_block);
        }
    }

    let mut succs = BTreeMap::new();
    for f in program.functions() {
        for b in &f.blocks {
            let out = match &b.terminator {
                Terminator::Goto(n) => vec![*n],
                Terminator::Branch {
                    then_block,
                    else_block,
                    ..
                } => vec![*then_block, *else_block],
                Terminator::Call { function, .. } => {
                    vec![program.function(function).expect("validated callee").entry_block]
                }
                Terminator::Return => return_blocks.get(f.name.as_str()).cloned().unwrap_or_default(),
                Terminator::Crash | Terminator::Halt => Vec::new(),
            };
            succs.insert(b.id, out);
        }
    }
    succs
}

/// Reverse breadth-first search from all blocks matching any target.
pub fn compute_distance_map(program: &ProgramModel, targets: &[TargetPoint]) -> DistanceMap {
    let succs = interprocedural_successors(program);
    let mut preds: BTreeMap<BlockId, Vec<BlockId>> = BTreeMap::new();
    for (&b, out) in &succs {
        for &s in out {
            preds.entry(s).or_default().push(b);
        }
    }

    let mut distances: BTreeMap<BlockId, Option<u32>> =
        succs.keys().map(|&b| (b, None)).collect();
    let mut queue = VecDeque::new();
    for t in targets {
        for b in program.blocks_at(&t.location) {
            if distances.insert(b, Some(0)) != Some(Some(0)) {
                queue.push_back(b);
            }
        }
    }
    while let Some(b) = queue.pop_front() {
        let d = distances[&b].expect("queued blocks have a distance");
        for &p in preds.get(&b).into_iter().flatten() {
            let slot = distances.get_mut(&p).expect("every block is keyed");
            if slot.is_none() {
                *slot = Some(d + 1);
                queue.push_back(p);
            }
        }
    }
    DistanceMap { distances }
}

/// Mean distance over the trace's finite-distance blocks, or infinity when
/// none of them can reach a target.
pub fn seed_distance(trace: &ExecutionTrace, dmap: &DistanceMap) -> f64 {
    let (sum, count) = trace
        .block_sequence
        .iter()
        .filter_map(|&b| dmap.get(b))
        .fold((0u64, 0u64), |(s, c), d| (s + u64::from(d), c + 1));
    if count == 0 {
        f64::INFINITY
    } else {
        sum as f64 / count as f64
    }
}
