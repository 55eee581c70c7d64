use serde::{Deserialize, Serialize};

use super::{BlockId, BytePredicate, FlatTerm, ProgramModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Crash,
    Timeout,
}

/// One executed branch: the condition and the direction actually taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathConstraint {
    pub block_id: BlockId,
    pub predicate: BytePredicate,
    pub taken: bool,
}

impl PathConstraint {
    /// The predicate as it must hold for this direction to be taken.
    pub fn effective(&self) -> BytePredicate {
        if self.taken {
            self.predicate.clone()
        } else {
            self.predicate.negated()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub block_sequence: Vec<BlockId>,
    pub visited_functions: Vec<String>,
    /// Target locations in order of first arrival.
    pub reached_targets: Vec<String>,
    pub outcome: Outcome,
    pub constraints: Vec<PathConstraint>,
}

/// Runs `program` on `input` for at most `step_limit` blocks.
///
/// Inputs shorter than the program's arity behave as if zero-padded.
/// Returning from the entry function ends the run normally.
pub fn execute(
    program: &ProgramModel,
    input: &[u8],
    step_limit: usize,
    collect_constraints: bool,
) -> ExecutionTrace {
    let flat = program.flat();
    let locations = program.target_locations();

    let mut block_sequence = Vec::new();
    let mut visited = vec![false; program.functions().len()];
    let mut visited_functions = Vec::new();
    let mut reached = vec![false; locations.len()];
    let mut reached_targets = Vec::new();
    let mut constraints = Vec::new();
    let mut call_stack: Vec<usize> = Vec::new();

    let mut current = program.entry_index();
    let mut outcome = Outcome::Timeout;
    for _ in 0..step_limit {
        let block = &flat[current];
        block_sequence.push(block.id);
        if !visited[block.function] {
            visited[block.function] = true;
            visited_functions.push(program.functions()[block.function].name.clone());
        }
        if let Some(loc) = block.target_location {
            if !reached[loc] {
                reached[loc] = true;
                reached_targets.push(locations[loc].clone());
            }
        }

        let next = match &block.term {
            FlatTerm::Goto(next) => *next,
            FlatTerm::Branch {
                cond,
                then_idx,
                else_idx,
            } => {
                let taken = cond.eval(input);
                if collect_constraints {
                    constraints.push(PathConstraint {
                        block_id: block.id,
                        predicate: cond.clone(),
                        taken,
                    });
                }
                if taken {
                    *then_idx
                } else {
                    *else_idx
                }
            }
            FlatTerm::Call { callee, return_idx } => {
                call_stack.push(*return_idx);
                *callee
            }
            FlatTerm::Return => match call_stack.pop() {
                Some(ret) => ret,
                None => {
                    outcome = Outcome::Ok;
                    break;
                }
            },
            FlatTerm::Crash => {
                outcome = Outcome::Crash;
                break;
            }
            FlatTerm::Halt => {
                outcome = Outcome::Ok;
                break;
            }
        };
        current = next;
    }

    ExecutionTrace {
        block_sequence,
        visited_functions,
        reached_targets,
        outcome,
        constraints,
    }
}
