//! Concolic explorer: runs one seed, inverts its branches in trace order and
//! writes the solved inputs to the sync directory.

mod solve;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use solve::{solve, SolveOutcome, Solver};

use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::program::{execute, ExecutionTrace, PathConstraint, ProgramModel};

/// A path prefix that must hold plus one branch whose direction is flipped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSystem {
    pub prefix: Vec<PathConstraint>,
    pub inverted: PathConstraint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorerBudget {
    #[serde(with = "secs")]
    pub per_run_limit: Duration,
    #[serde(with = "secs")]
    pub per_query_limit: Duration,
    #[serde(with = "secs")]
    pub total_solve_limit: Duration,
    pub max_inversions: usize,
}

impl Default for ExplorerBudget {
    fn default() -> Self {
        ExplorerBudget {
            per_run_limit: Duration::from_secs(12),
            per_query_limit: Duration::from_secs(1),
            total_solve_limit: Duration::from_secs(6),
            max_inversions: usize::MAX,
        }
    }
}

impl ExplorerBudget {
    pub fn validate(&self) -> Result<()> {
        if self.per_query_limit > self.total_solve_limit || self.total_solve_limit > self.per_run_limit {
            return Err(Error::Config(
                "explorer budget must satisfy per_query <= total_solve <= per_run".into(),
            ));
        }
        Ok(())
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

/// One system per executed branch, in trace order.
pub fn invert_branches(trace: &ExecutionTrace) -> Vec<ConstraintSystem> {
    trace
        .constraints
        .iter()
        .enumerate()
        .map(|(k, c)| ConstraintSystem {
            prefix: trace.constraints[..k].to_vec(),
            inverted: PathConstraint {
                taken: !c.taken,
                ..c.clone()
            },
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolutionKind {
    Full,
    Optimistic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedInput {
    pub path: PathBuf,
    /// Index of the inverted constraint in the seed's trace.
    pub inverted_index: usize,
    pub kind: SolutionKind,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExplorerReport {
    pub generated: Vec<GeneratedInput>,
    pub attempted: usize,
    pub unsat: usize,
    pub budget_exceeded: usize,
    pub solve_time: Duration,
}

/// Explores `seed_bytes`, writing `<seed_name>_inv<k>` files to `sync_dir`.
pub fn run_explorer(
    seed_name: &str,
    seed_bytes: &[u8],
    program: &ProgramModel,
    sync_dir: &Path,
    budget: &ExplorerBudget,
    step_limit: usize,
) -> Result<ExplorerReport> {
    run_explorer_until(seed_name, seed_bytes, program, sync_dir, budget, step_limit, &AtomicBool::new(false))
}

/// [`run_explorer`] that also stops between queries once `cancel` is set.
pub fn run_explorer_until(
    seed_name: &str,
    seed_bytes: &[u8],
    program: &ProgramModel,
    sync_dir: &Path,
    budget: &ExplorerBudget,
    step_limit: usize,
    cancel: &AtomicBool,
) -> Result<ExplorerReport> {
    let started = Instant::now();
    let trace = execute(program, seed_bytes, step_limit, true);
    let mut solver = Solver::new(budget.clone());
    let mut report = ExplorerReport::default();

    for (k, system) in invert_branches(&trace).into_iter().enumerate().take(budget.max_inversions) {
        if started.elapsed() >= budget.per_run_limit
            || solver.spent() >= budget.total_solve_limit
            || cancel.load(Ordering::Relaxed)
        {
            break;
        }
        report.attempted += 1;
        let (bytes, kind) = match solver.solve(&system, seed_bytes) {
            SolveOutcome::Solution(b) => (b, SolutionKind::Full),
            SolveOutcome::Optimistic(b) => (b, SolutionKind::Optimistic),
            SolveOutcome::Unsat => {
                report.unsat += 1;
                continue;
            }
            SolveOutcome::BudgetExceeded => {
                report.budget_exceeded += 1;
                continue;
            }
        };
        let name = format!("{seed_name}_inv{k}");
        let path = write_atomic(sync_dir, &name, &bytes)?;
        report.generated.push(GeneratedInput {
            path,
            inverted_index: k,
            kind,
        });
    }
    report.solve_time = solver.spent();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, BlockId};

    const GUARDED: &str = r#"
entry_function = "main"

[[function]]
name = "main"
entry = 0

[[function.block]]
id = 0
label = "g.c:1"
term = { kind = "branch", offsets = [0], rel = "eq", value = 0x41, then = 1, else = 9 }

[[function.block]]
id = 1
label = "g.c:2"
term = { kind = "branch", offsets = [1, 2, 3, 4], rel = "eq", value = 0x4A415350, then = 2, else = 9 }

[[function.block]]
id = 2
label = "g.c:3"
term = { kind = "crash" }

[[function.block]]
id = 9
label = "g.c:9"
term = { kind = "halt" }
"#;

    const CHAIN5: &str = r#"
entry_function = "main"
[[function]]
name = "main"
entry = 0
[[function.block]]
id = 0
label = "c.c:0"
term = { kind = "branch", offsets = [0], rel = "lt", value = 200, then = 1, else = 1 }
[[function.block]]
id = 1
label = "c.c:1"
term = { kind = "branch", offsets = [1], rel = "lt", value = 200, then = 2, else = 2 }
[[function.block]]
id = 2
label = "c.c:2"
term = { kind = "branch", offsets = [2], rel = "lt", value = 200, then = 3, else = 3 }
[[function.block]]
id = 3
label = "c.c:3"
term = { kind = "branch", offsets = [3], rel = "lt", value = 200, then = 4, else = 4 }
[[function.block]]
id = 4
label = "c.c:4"
term = { kind = "branch", offsets = [4], rel = "lt", value = 200, then = 5, else = 5 }
[[function.block]]
id = 5
label = "c.c:5"
term = { kind = "halt" }
"#;

    #[test]
    fn direct_order_systems() {
        let p = parse_program(CHAIN5).unwrap();
        let trace = execute(&p, &[0; 5], 100, true);
        let systems = invert_branches(&trace);
        assert_eq!(systems.len(), 5);
        for (k, s) in systems.iter().enumerate() {
            assert_eq!(s.prefix, trace.constraints[..k]);
            assert_eq!(s.inverted.block_id, BlockId(k as u32));
            assert_eq!(s.inverted.taken, !trace.constraints[k].taken);
        }
    }

    #[test]
    fn one_branch_magic_yields_the_byte() {
        let p = parse_program(GUARDED).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let r = run_explorer("s", &[0], &p, dir.path(), &ExplorerBudget::default(), 100).unwrap();
        assert_eq!(r.generated.len(), 1);
        let g = &r.generated[0];
        assert_eq!(g.path.file_name().unwrap(), "s_inv0");
        assert_eq!(std::fs::read(&g.path).unwrap(), vec![0x41]);
    }

    #[test]
    fn magic_behind_prefix_replays() {
        let p = parse_program(GUARDED).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let r = run_explorer("s", b"A", &p, dir.path(), &ExplorerBudget::default(), 100).unwrap();
        let seed_trace = execute(&p, b"A", 100, true);
        assert_eq!(r.generated.len(), 2);
        for g in &r.generated {
            let bytes = std::fs::read(&g.path).unwrap();
            let replay = execute(&p, &bytes, 100, true);
            let k = g.inverted_index;
            assert_eq!(g.kind, SolutionKind::Full);
            assert_eq!(replay.constraints[k].taken, !seed_trace.constraints[k].taken);
            assert_eq!(replay.constraints[..k], seed_trace.constraints[..k]);
        }
        let magic = std::fs::read(dir.path().join("s_inv1")).unwrap();
        assert_eq!(magic, b"AJASP");
        assert_eq!(execute(&p, &magic, 100, false).outcome, crate::program::Outcome::Crash);
    }

    #[test]
    fn explorer_ignores_fuzzer_coverage() {
        // every branch of CHAIN5 joins immediately, so inversions add no coverage
        let p = parse_program(CHAIN5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let r = run_explorer("s", &[0; 5], &p, dir.path(), &ExplorerBudget::default(), 100).unwrap();
        assert_eq!(r.generated.len(), 5);
    }

    #[test]
    fn max_inversions_limits_attempts() {
        let p = parse_program(CHAIN5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let budget = ExplorerBudget {
            max_inversions: 2,
            ..ExplorerBudget::default()
        };
        let r = run_explorer("s", &[0; 5], &p, dir.path(), &budget, 100).unwrap();
        assert_eq!(r.attempted, 2);
        assert_eq!(r.generated.len(), 2);
    }

    #[test]
    fn cancelled_run_attempts_nothing() {
        let p = parse_program(CHAIN5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let cancel = AtomicBool::new(true);
        let r = run_explorer_until("s", &[0; 5], &p, dir.path(), &ExplorerBudget::default(), 100, &cancel).unwrap();
        assert_eq!(r.attempted, 0);
    }

    #[test]
    fn unwritable_sync_dir_is_an_error() {
        let p = parse_program(GUARDED).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("absent");
        assert!(run_explorer("s", &[0], &p, &missing, &ExplorerBudget::default(), 100).is_err());
    }

    #[test]
    fn budget_ordering_is_validated() {
        assert!(ExplorerBudget::default().validate().is_ok());
        let bad = ExplorerBudget {
            per_query_limit: Duration::from_secs(7),
            ..ExplorerBudget::default()
        };
        assert!(bad.validate().is_err());
    }
}
