//! Iterative dominator computation (intersection over predecessors).

use std::collections::{BTreeMap, BTreeSet};

use crate::program::{BlockId, FunctionDef, ProgramModel};

/// Dominator sets of the reachable blocks of one function.
pub type BlockDominators = BTreeMap<BlockId, BTreeSet<BlockId>>;

/// Dominator sets over a graph of dense node indices.
///
/// Nodes unreachable from `root` get `None`.
pub(crate) fn dominator_sets(succs: &[Vec<usize>], root: usize) -> Vec<Option<BTreeSet<usize>>> {
    let n = succs.len();
    let order = reverse_postorder(succs, root);
    let mut reachable = vec![false; n];
    for &v in &order {
        reachable[v] = true;
    }
    let mut preds = vec![Vec::new(); n];
    for &v in &order {
        for &s in &succs[v] {
            preds[s].push(v);
        }
    }

    let all: BTreeSet<usize> = order.iter().copied().collect();
    let mut dom: Vec<Option<BTreeSet<usize>>> = (0..n)
        .map(|v| reachable[v].then(|| all.clone()))
        .collect();
    dom[root] = Some(BTreeSet::from([root]));

    let mut changed = true;
    while changed {
        changed = false;
        for &v in order.iter().skip(1) {
            let mut next: Option<BTreeSet<usize>> = None;
            for &p in &preds[v] {
                let pd = dom[p].as_ref().expect("predecessor of a reachable node is reachable");
                next = Some(match next {
                    None => pd.clone(),
                    Some(acc) => acc.intersection(pd).copied().collect(),
                });
            }
            let mut next = next.unwrap_or_default();
            next.insert(v);
            if dom[v].as_ref() != Some(&next) {
                dom[v] = Some(next);
                changed = true;
            }
        }
    }
    dom
}

fn reverse_postorder(succs: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut seen = vec![false; succs.len()];
    let mut post = Vec::with_capacity(succs.len());
    let mut stack = vec![(root, 0usize)];
    seen[root] = true;
    while let Some((v, i)) = stack.pop() {
        if let Some(&s) = succs[v].get(i) {
            stack.push((v, i + 1));
            if !seen[s] {
                seen[s] = true;
                stack.push((s, 0));
            }
        } else {
            post.push(v);
        }
    }
    post.reverse();
    post
}

/// Dominators of every block reachable from the function's entry block.
pub fn compute_dominators(func: &FunctionDef) -> BlockDominators {
    let index: BTreeMap<BlockId, usize> = func
        .blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id, i))
        .collect();
    let succs: Vec<Vec<usize>> = func
        .blocks
        .iter()
        .map(|b| {
            b.terminator
                .successors()
                .iter()
                .filter_map(|s| index.get(s).copied())
                .collect()
        })
        .collect();
    let Some(&root) = index.get(&func.entry_block) else {
        return BlockDominators::new();
    };

    dominator_sets(&succs, root)
        .into_iter()
        .enumerate()
        .filter_map(|(i, d)| {
            d.map(|set| {
                let ids = set.into_iter().map(|j| func.blocks[j].id).collect();
                (func.blocks[i].id, ids)
            })
        })
        .collect()
}

/// Per-function block dominators for a whole program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DominatorMap {
    per_function: BTreeMap<String, BlockDominators>,
}

impl DominatorMap {
    pub fn compute(program: &ProgramModel) -> Self {
        DominatorMap {
            per_function: program
                .functions()
                .iter()
                .map(|f| (f.name.clone(), compute_dominators(f)))
                .collect(),
        }
    }

    pub fn function(&self, name: &str) -> Option<&BlockDominators> {
        self.per_function.get(name)
    }

    /// Dominators of `block` within `function`; `None` if unreachable.
    pub fn of(&self, function: &str, block: BlockId) -> Option<&BTreeSet<BlockId>> {
        self.per_function.get(function)?.get(&block)
    }

    pub fn dominates(&self, function: &str, d: BlockId, b: BlockId) -> bool {
        self.of(function, b).is_some_and(|s| s.contains(&d))
    }
}
