//! Synthetic target programs.
//!
//! A [`ProgramModel`] stands in for an instrumented binary: a set of
//! functions whose basic blocks branch on byte predicates over the input.
//! Models are immutable once validated and can be shared across workers.

mod exec;
mod parse;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exec::{execute, ExecutionTrace, Outcome, PathConstraint};
pub use parse::parse_program;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: u64, rhs: u64) -> bool {
        match self {
            Relation::Eq => lhs == rhs,
            Relation::Ne => lhs != rhs,
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
        }
    }

    /// The relation that holds exactly when `self` does not.
    pub fn negate(self) -> Relation {
        match self {
            Relation::Eq => Relation::Ne,
            Relation::Ne => Relation::Eq,
            Relation::Lt => Relation::Ge,
            Relation::Le => Relation::Gt,
            Relation::Gt => Relation::Le,
            Relation::Ge => Relation::Lt,
        }
    }
}

/// Comparison of the big-endian integer formed by up to eight input bytes
/// against a constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BytePredicate {
    pub offsets: Vec<usize>,
    pub relation: Relation,
    pub constant: u64,
}

impl BytePredicate {
    pub fn new(offsets: Vec<usize>, relation: Relation, constant: u64) -> Result<Self> {
        let pred = BytePredicate {
            offsets,
            relation,
            constant,
        };
        pred.check()?;
        Ok(pred)
    }

    fn check(&self) -> Result<()> {
        if self.offsets.is_empty() || self.offsets.len() > 8 {
            return Err(Error::Semantic(format!(
                "predicate must name 1 to 8 bytes, got {}",
                self.offsets.len()
            )));
        }
        if self.offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Semantic(format!(
                "predicate offsets {:?} are not strictly increasing",
                self.offsets
            )));
        }
        if self.constant > self.max_value() {
            return Err(Error::Semantic(format!(
                "constant {:#x} does not fit in {} byte(s)",
                self.constant,
                self.width()
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.offsets.len()
    }

    /// Largest value representable in the predicate's byte width.
    pub fn max_value(&self) -> u64 {
        match self.width() {
            8 => u64::MAX,
            w => (1u64 << (8 * w)) - 1,
        }
    }

    /// Reads the operand from `input`; missing bytes read as zero.
    pub fn operand(&self, input: &[u8]) -> u64 {
        self.offsets.iter().fold(0u64, |acc, &off| {
            (acc << 8) | u64::from(input.get(off).copied().unwrap_or(0))
        })
    }

    pub fn eval(&self, input: &[u8]) -> bool {
        self.relation.holds(self.operand(input), self.constant)
    }

    pub fn negated(&self) -> BytePredicate {
        BytePredicate {
            offsets: self.offsets.clone(),
            relation: self.relation.negate(),
            constant: self.constant,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminator {
    Goto(BlockId),
    Branch {
        cond: BytePredicate,
        then_block: BlockId,
        else_block: BlockId,
    },
    Call {
        function: String,
        return_block: BlockId,
    },
    Return,
    Crash,
    Halt,
}

impl Terminator {
    /// Intra-procedural successors. A call falls through to its return block.
    pub fn successors(&self) -> Vec<BlockId> {
        match self {
            Terminator::Goto(next) => vec![*next],
            Terminator::Branch {
                then_block,
                else_block,
                ..
            } => vec![*then_block, *else_block],
            Terminator::Call { return_block, .. } => vec![*return_block],
            Terminator::Return | Terminator::Crash | Terminator::Halt => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: BlockId,
    /// Source location, `file:line`.
    pub label: String,
    pub terminator: Terminator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub entry_block: BlockId,
    pub blocks: Vec<BasicBlock>,
}

impl FunctionDef {
    pub fn block(&self, id: BlockId) -> Option<&BasicBlock> {
        self.blocks.iter().find(|b| b.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetPoint {
    pub id: String,
    pub location: String,
}

impl TargetPoint {
    pub fn new(id: impl Into<String>, location: impl Into<String>) -> Self {
        TargetPoint {
            id: id.into(),
            location: location.into(),
        }
    }
}

/// Terminator with block references resolved to dense indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum FlatTerm {
    Goto(usize),
    Branch {
        cond: BytePredicate,
        then_idx: usize,
        else_idx: usize,
    },
    Call {
        callee: usize,
        return_idx: usize,
    },
    Return,
    Crash,
    Halt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct FlatBlock {
    pub id: BlockId,
    pub function: usize,
    pub term: FlatTerm,
    /// Index into `ProgramModel::target_locations` when the label is a target.
    pub target_location: Option<usize>,
}

/// A validated synthetic program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramModel {
    functions: Vec<FunctionDef>,
    entry_function: String,
    targets: Vec<TargetPoint>,
    input_arity: usize,
    function_index: HashMap<String, usize>,
    block_index: HashMap<BlockId, usize>,
    flat: Vec<FlatBlock>,
    target_locations: Vec<String>,
}

impl ProgramModel {
    pub fn new(
        functions: Vec<FunctionDef>,
        entry_function: impl Into<String>,
        targets: Vec<TargetPoint>,
    ) -> Result<Self> {
        let entry_function = entry_function.into();

        let mut function_index = HashMap::new();
        for (i, f) in functions.iter().enumerate() {
            if function_index.insert(f.name.clone(), i).is_some() {
                return Err(Error::Semantic(format!("duplicate function `{}`", f.name)));
            }
        }
        let mut block_index = HashMap::new();
        let mut owner = Vec::new();
        for (fi, f) in functions.iter().enumerate() {
            for b in &f.blocks {
                if block_index.insert(b.id, owner.len()).is_some() {
                    return Err(Error::Semantic(format!("duplicate block id {}", b.id)));
                }
                if b.label.is_empty() {
                    return Err(Error::Semantic(format!("block {} has an empty label", b.id)));
                }
                owner.push((fi, b));
            }
        }
        if !function_index.contains_key(&entry_function) {
            return Err(Error::Semantic(format!(
                "entry function `{entry_function}` is not defined"
            )));
        }

        let mut input_arity = 0;
        for f in &functions {
            if f.block(f.entry_block).is_none() {
                return Err(Error::Semantic(format!(
                    "entry block {} of function `{}` is not one of its blocks",
                    f.entry_block, f.name
                )));
            }
            for b in &f.blocks {
                for succ in b.terminator.successors() {
                    if f.block(succ).is_none() {
                        return Err(Error::Semantic(format!(
                            "block {} in `{}` references block {} outside the function",
                            b.id, f.name, succ
                        )));
                    }
                }
                match &b.terminator {
                    Terminator::Call { function, .. } if !function_index.contains_key(function) => {
                        return Err(Error::Semantic(format!(
                            "block {} calls undefined function `{}`",
                            b.id, function
                        )));
                    }
                    Terminator::Branch { cond, .. } => {
                        cond.check()
                            .map_err(|e| Error::Semantic(format!("block {}: {e}", b.id)))?;
                        input_arity = input_arity.max(cond.offsets[cond.width() - 1] + 1);
                    }
                    _ => {}
                }
            }
        }

        let mut target_locations: Vec<String> = Vec::new();
        for t in &targets {
            if !owner.iter().any(|(_, b)| b.label == t.location) {
                return Err(Error::Semantic(format!(
                    "target `{}` location {} matches no block label",
                    t.id, t.location
                )));
            }
            if !target_locations.contains(&t.location) {
                target_locations.push(t.location.clone());
            }
        }

        let flat = owner
            .iter()
            .map(|&(fi, b)| {
                let term = match &b.terminator {
                    Terminator::Goto(next) => FlatTerm::Goto(block_index[next]),
                    Terminator::Branch {
                        cond,
                        then_block,
                        else_block,
                    } => FlatTerm::Branch {
                        cond: cond.clone(),
                        then_idx: block_index[then_block],
                        else_idx: block_index[else_block],
                    },
                    Terminator::Call {
                        function,
                        return_block,
                    } => {
                        let callee = &functions[function_index[function]];
                        FlatTerm::Call {
                            callee: block_index[&callee.entry_block],
                            return_idx: block_index[return_block],
                        }
                    }
                    Terminator::Return => FlatTerm::Return,
                    Terminator::Crash => FlatTerm::Crash,
                    Terminator::Halt => FlatTerm::Halt,
                };
                FlatBlock {
                    id: b.id,
                    function: fi,
                    term,
                    target_location: target_locations.iter().position(|l| *l == b.label),
                }
            })
            .collect();

        Ok(ProgramModel {
            functions,
            entry_function,
            targets,
            input_arity,
            function_index,
            block_index,
            flat,
            target_locations,
        })
    }

    /// Same program with a different target list.
    pub fn with_targets(&self, targets: Vec<TargetPoint>) -> Result<Self> {
        ProgramModel::new(self.functions.clone(), self.entry_function.clone(), targets)
    }

    pub fn functions(&self) -> &[FunctionDef] {
        &self.functions
    }

    pub fn entry_function(&self) -> &str {
        &self.entry_function
    }

    pub fn targets(&self) -> &[TargetPoint] {
        &self.targets
    }

    /// One past the largest byte offset any predicate reads.
    pub fn input_arity(&self) -> usize {
        self.input_arity
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.function_index.get(name).map(|&i| &self.functions[i])
    }

    pub fn block(&self, id: BlockId) -> Option<&BasicBlock> {
        let fi = self.flat.get(*self.block_index.get(&id)?)?.function;
        self.functions[fi].block(id)
    }

    /// The function containing block `id`.
    pub fn function_of(&self, id: BlockId) -> Option<&FunctionDef> {
        let idx = *self.block_index.get(&id)?;
        Some(&self.functions[self.flat[idx].function])
    }

    pub fn blocks(&self) -> impl Iterator<Item = &BasicBlock> {
        self.functions.iter().flat_map(|f| f.blocks.iter())
    }

    pub fn block_count(&self) -> usize {
        self.flat.len()
    }

    /// Blocks whose label equals `location`, in program order.
    pub fn blocks_at(&self, location: &str) -> Vec<BlockId> {
        self.blocks()
            .filter(|b| b.label == location)
            .map(|b| b.id)
            .collect()
    }

    pub(crate) fn flat(&self) -> &[FlatBlock] {
        &self.flat
    }

    pub(crate) fn entry_index(&self) -> usize {
        let f = &self.functions[self.function_index[&self.entry_function]];
        self.block_index[&f.entry_block]
    }

    pub(crate) fn target_locations(&self) -> &[String] {
        &self.target_locations
    }
}
