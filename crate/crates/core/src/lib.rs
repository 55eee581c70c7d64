//! Hybrid directed fuzzing over synthetic program models.
//!
//! A directed greybox fuzzer and a concolic explorer run side by side and
//! exchange seeds through the filesystem; an orchestrator schedules explorer
//! seeds from a priority queue, decides when to stop, and deduplicates and
//! sorts the objectives found.

pub mod analysis;
pub mod clock;
pub mod error;
pub mod explorer;
pub mod fsutil;
pub mod fuzzer;
pub mod orchestrator;
pub mod program;

pub use error::{Error, Result};
pub use program::{
    execute, parse_program, BlockId, BytePredicate, ExecutionTrace, Outcome, PathConstraint,
    ProgramModel, Relation, TargetPoint,
};
