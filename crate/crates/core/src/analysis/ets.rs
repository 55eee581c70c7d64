use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::callgraph::CallGraph;
use super::dominators::DominatorMap;
use crate::error::{Error, Result};
use crate::program::{BlockId, ProgramModel, TargetPoint, Terminator};

/// Per-target sequence of dominator functions and dominator blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnhancedTargetSequence {
    pub target_id: String,
    pub dominator_functions: Vec<String>,
    pub member_blocks: Vec<BlockId>,
}

/// Builds the ETS of `target`.
///
/// For every function on the call-graph dominator chain of the target's
/// function, the members are the blocks dominating that function's exit
/// point: every reachable call site leading toward the next chain function
/// (their common dominators), or the target block itself. When a location
/// matches several blocks, their sequences are merged.
pub fn build_ets(
    program: &ProgramModel,
    target: &TargetPoint,
    call_graph: &CallGraph,
    dominators: &DominatorMap,
) -> Result<EnhancedTargetSequence> {
    let mut functions: Vec<String> = Vec::new();
    let mut members: Vec<BlockId> = Vec::new();
    let mut resolved = false;

    for block in program.blocks_at(&target.location) {
        let Some((chain, blocks)) = sequence_for_block(program, block, call_graph, dominators)
        else {
            continue;
        };
        resolved = true;
        for f in chain {
            if !functions.contains(&f) {
                functions.push(f);
            }
        }
        for b in blocks {
            if !members.contains(&b) {
                members.push(b);
            }
        }
    }

    if !resolved {
        return Err(Error::UnreachableTarget {
            target: format!("{} ({})", target.id, target.location),
            entry: program.entry_function().to_string(),
        });
    }
    Ok(EnhancedTargetSequence {
        target_id: target.id.clone(),
        dominator_functions: functions,
        member_blocks: members,
    })
}

fn sequence_for_block(
    program: &ProgramModel,
    target_block: BlockId,
    call_graph: &CallGraph,
    dominators: &DominatorMap,
) -> Option<(Vec<String>, Vec<BlockId>)> {
    let home = &program.function_of(target_block)?.name;
    let chain = call_graph.dominator_chain(program.entry_function(), home)?;
    let mut members = Vec::new();

    for (i, fname) in chain.iter().enumerate() {
        let doms = dominators.function(fname)?;
        let exit_doms: BTreeSet<BlockId> = match chain.get(i + 1) {
            None => doms.get(&target_block)?.clone(),
            Some(next) => {
                let func = program.function(fname)?;
                let mut common: Option<BTreeSet<BlockId>> = None;
                for b in &func.blocks {
                    let Terminator::Call { function: callee, .. } = &b.terminator else {
                        continue;
                    };
                    let Some(site_doms) = doms.get(&b.id) else {
                        continue;
                    };
                    if callee == next || call_graph.reaches(callee, next) {
                        common = Some(match common {
                            None => site_doms.clone(),
                            Some(acc) => acc.intersection(site_doms).copied().collect(),
                        });
                    }
                }
                common?
            }
        };
        let mut ordered: Vec<BlockId> = exit_doms.into_iter().collect();
        ordered.sort_by_key(|b| doms.get(b).map_or(0, BTreeSet::len));
        members.extend(ordered);
    }
    Some((chain, members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::callgraph::build_call_graph;
    use crate::program::parse_program;

    fn ets_for(text: &str) -> Result<EnhancedTargetSequence> {
        let p = parse_program(text).unwrap();
        let cg = build_call_graph(&p);
        let dm = DominatorMap::compute(&p);
        build_ets(&p, &p.targets()[0], &cg, &dm)
    }

    fn ids(v: &[u32]) -> Vec<BlockId> {
        v.iter().copied().map(BlockId).collect()
    }

    #[test]
    fn single_function_chain() {
        let ets = ets_for(
            r#"
entry_function = "main"
[[function]]
name = "main"
entry = 0
[[function.block]]
id = 0
label = "c.c:1"
term = { kind = "goto", next = 1 }
[[function.block]]
id = 1
label = "c.c:2"
term = { kind = "goto", next = 2 }
[[function.block]]
id = 2
label = "c.c:3"
term = { kind = "halt" }
[[target]]
id = "c"
location = "c.c:3"
"#,
        )
        .unwrap();
        assert_eq!(ets.dominator_functions, vec!["main"]);
        assert_eq!(ets.member_blocks, ids(&[0, 1, 2]));
    }

    // main: M0 -> M1 (call f) -> M2 ; f: F1 -> F2 (target)
    const CALL_INTO_F: &str = r#"
entry_function = "main"
[[function]]
name = "main"
entry = 0
[[function.block]]
id = 0
label = "m.c:1"
term = { kind = "branch", offsets = [0], rel = "eq", value = 1, then = 1, else = 2 }
[[function.block]]
id = 1
label = "m.c:2"
term = { kind = "call", function = "f", ret = 2 }
[[function.block]]
id = 2
label = "m.c:3"
term = { kind = "halt" }
[[function]]
name = "f"
entry = 10
[[function.block]]
id = 10
label = "f.c:1"
term = { kind = "goto", next = 11 }
[[function.block]]
id = 11
label = "f.c:2"
term = { kind = "return" }
[[target]]
id = "f2"
location = "f.c:2"
"#;

    #[test]
    fn call_site_dominators_then_callee_chain() {
        let ets = ets_for(CALL_INTO_F).unwrap();
        assert_eq!(ets.dominator_functions, vec!["main", "f"]);
        // dom(M1) = {M0, M1}; then F1, F2. M2 is not on the way.
        assert_eq!(ets.member_blocks, ids(&[0, 1, 10, 11]));
    }

    #[test]
    fn uncalled_function_is_unreachable() {
        let text = CALL_INTO_F.replace(
            r#"term = { kind = "call", function = "f", ret = 2 }"#,
            r#"term = { kind = "goto", next = 2 }"#,
        );
        assert!(matches!(ets_for(&text), Err(Error::UnreachableTarget { .. })));
    }

    #[test]
    fn intermediate_function_off_the_dominator_chain() {
        // main calls a or b; both call f. Only main and f dominate f.
        let ets = ets_for(
            r#"
entry_function = "main"
[[function]]
name = "main"
entry = 0
[[function.block]]
id = 0
label = "m.c:1"
term = { kind = "branch", offsets = [0], rel = "lt", value = 9, then = 1, else = 2 }
[[function.block]]
id = 1
label = "m.c:2"
term = { kind = "call", function = "a", ret = 3 }
[[function.block]]
id = 2
label = "m.c:3"
term = { kind = "call", function = "b", ret = 3 }
[[function.block]]
id = 3
label = "m.c:4"
term = { kind = "halt" }
[[function]]
name = "a"
entry = 10
[[function.block]]
id = 10
label = "a.c:1"
term = { kind = "call", function = "f", ret = 11 }
[[function.block]]
id = 11
label = "a.c:2"
term = { kind = "return" }
[[function]]
name = "b"
entry = 20
[[function.block]]
id = 20
label = "b.c:1"
term = { kind = "call", function = "f", ret = 21 }
[[function.block]]
id = 21
label = "b.c:2"
term = { kind = "return" }
[[function]]
name = "f"
entry = 30
[[function.block]]
id = 30
label = "f.c:1"
term = { kind = "return" }
[[target]]
id = "f"
location = "f.c:1"
"#,
        )
        .unwrap();
        assert_eq!(ets.dominator_functions, vec!["main", "f"]);
        // both call sites in main lead toward f; only block 0 dominates both
        assert_eq!(ets.member_blocks, ids(&[0, 30]));
    }
}
