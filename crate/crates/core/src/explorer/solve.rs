//! Exact solver for conjunctions of byte predicates.
//!
//! Each predicate constrains the big-endian value of at most eight bytes to
//! a union of intervals. Predicates sharing offsets with the inverted one
//! are solved together by depth-first search over byte values, pruned with
//! interval bounds; everything else keeps the base input's bytes.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use super::{ConstraintSystem, ExplorerBudget};
use crate::program::{BytePredicate, Relation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Satisfies the prefix and the inverted constraint.
    Solution(Vec<u8>),
    Unsat,
    /// Satisfies the inverted constraint alone.
    Optimistic(Vec<u8>),
    BudgetExceeded,
}

/// A predicate as a set of allowed operand values.
#[derive(Debug, Clone)]
struct Requirement {
    offsets: Vec<usize>,
    allowed: Vec<(u64, u64)>,
}

impl Requirement {
    fn new(pred: &BytePredicate) -> Self {
        let max = pred.max_value();
        let c = pred.constant;
        let mut allowed = Vec::with_capacity(2);
        match pred.relation {
            Relation::Eq => allowed.push((c, c)),
            Relation::Ne => {
                if c > 0 {
                    allowed.push((0, c - 1));
                }
                if c < max {
                    allowed.push((c + 1, max));
                }
            }
            Relation::Lt if c > 0 => allowed.push((0, c - 1)),
            Relation::Lt => {}
            Relation::Le => allowed.push((0, c)),
            Relation::Gt if c < max => allowed.push((c + 1, max)),
            Relation::Gt => {}
            Relation::Ge => allowed.push((c, max)),
        }
        Requirement {
            offsets: pred.offsets.clone(),
            allowed,
        }
    }

    fn admits_range(&self, lo: u64, hi: u64) -> bool {
        self.allowed.iter().any(|&(a, b)| a <= hi && lo <= b)
    }
}

enum Search {
    Found(Vec<u8>),
    Exhausted,
    TimedOut,
}

struct Problem<'a> {
    reqs: Vec<&'a Requirement>,
    /// Variable offsets in ascending order.
    vars: Vec<usize>,
    /// Requirements touching each variable.
    touching: Vec<Vec<usize>>,
    deadline: Instant,
    nodes: u64,
}

impl Problem<'_> {
    /// Operand bounds with bytes not yet assigned ranging over 0..=255.
    fn bounds(req: &Requirement, bytes: &[u8], assigned: &dyn Fn(usize) -> bool) -> (u64, u64) {
        let (mut lo, mut hi) = (0u64, 0u64);
        for &off in &req.offsets {
            let (l, h) = if assigned(off) {
                let v = u64::from(bytes.get(off).copied().unwrap_or(0));
                (v, v)
            } else {
                (0, 0xFF)
            };
            lo = (lo << 8) | l;
            hi = (hi << 8) | h;
        }
        (lo, hi)
    }

    fn candidates(&self, var_idx: usize, base: u8) -> Vec<u8> {
        let off = self.vars[var_idx];
        let mut seen = [false; 256];
        let mut out = Vec::with_capacity(256);
        let mut push = |v: u8, out: &mut Vec<u8>| {
            if !seen[v as usize] {
                seen[v as usize] = true;
                out.push(v);
            }
        };
        push(base, &mut out);
        for &r in &self.touching[var_idx] {
            let req = self.reqs[r];
            let pos = req.offsets.iter().position(|&o| o == off).expect("touching");
            let shift = 8 * (req.offsets.len() - 1 - pos);
            for &(a, b) in &req.allowed {
                push((a >> shift) as u8, &mut out);
                push((b >> shift) as u8, &mut out);
            }
        }
        for v in 0..=255u8 {
            push(v, &mut out);
        }
        out
    }

    fn search(&mut self, bytes: &mut Vec<u8>, depth: usize) -> Search {
        if depth == self.vars.len() {
            return Search::Found(bytes.clone());
        }
        let off = self.vars[depth];
        let base = bytes[off];
        let var_set: BTreeSet<usize> = self.vars[depth + 1..].iter().copied().collect();
        for v in self.candidates(depth, base) {
            self.nodes += 1;
            if self.nodes.is_multiple_of(1024) && Instant::now() >= self.deadline {
                bytes[off] = base;
                return Search::TimedOut;
            }
            bytes[off] = v;
            let assigned = |o: usize| !var_set.contains(&o);
            let consistent = self.touching[depth].iter().all(|&r| {
                let req = self.reqs[r];
                let (lo, hi) = Self::bounds(req, bytes, &assigned);
                req.admits_range(lo, hi)
            });
            if !consistent {
                continue;
            }
            match self.search(bytes, depth + 1) {
                Search::Exhausted => continue,
                other => return other,
            }
        }
        bytes[off] = base;
        Search::Exhausted
    }
}

/// Tracks solving time across the queries of one explorer run.
#[derive(Debug, Clone)]
pub struct Solver {
    budget: ExplorerBudget,
    spent: Duration,
    optimistic: bool,
}

impl Solver {
    pub fn new(budget: ExplorerBudget) -> Self {
        Solver {
            budget,
            spent: Duration::ZERO,
            optimistic: true,
        }
    }

    /// Disables the inverted-constraint-only fallback.
    pub fn without_optimistic(mut self) -> Self {
        self.optimistic = false;
        self
    }

    pub fn spent(&self) -> Duration {
        self.spent
    }

    fn remaining(&self) -> Duration {
        self.budget.total_solve_limit.saturating_sub(self.spent)
    }

    pub fn solve(&mut self, system: &ConstraintSystem, base: &[u8]) -> SolveOutcome {
        let started = Instant::now();
        let outcome = self.solve_inner(system, base);
        self.spent += started.elapsed();
        outcome
    }

    fn query_deadline(&self, since: Instant) -> Option<Instant> {
        let window = self.budget.per_query_limit.min(self.remaining().saturating_sub(since.elapsed()));
        (!window.is_zero()).then(|| Instant::now() + window)
    }

    fn solve_inner(&mut self, system: &ConstraintSystem, base: &[u8]) -> SolveOutcome {
        let started = Instant::now();
        let target = system.inverted.effective();
        let frame = base
            .len()
            .max(target.offsets.last().map_or(0, |&o| o + 1));
        let mut bytes = base.to_vec();
        bytes.resize(frame, 0);

        let inverted = Requirement::new(&target);
        let prefix: Vec<Requirement> = system.prefix.iter().map(|c| Requirement::new(&c.effective())).collect();

        let Some(deadline) = self.query_deadline(started) else {
            return SolveOutcome::BudgetExceeded;
        };
        match solve_component(&inverted, &prefix, &bytes, frame, deadline) {
            Search::Found(candidate) => {
                let holds = target.eval(&candidate)
                    && system.prefix.iter().all(|c| c.predicate.eval(&candidate) == c.taken);
                if holds {
                    return SolveOutcome::Solution(candidate);
                }
            }
            Search::Exhausted | Search::TimedOut => {}
        }

        if !self.optimistic {
            return SolveOutcome::Unsat;
        }
        let Some(deadline) = self.query_deadline(started) else {
            return SolveOutcome::BudgetExceeded;
        };
        match solve_component(&inverted, &[], &bytes, frame, deadline) {
            Search::Found(candidate) => SolveOutcome::Optimistic(candidate),
            Search::Exhausted => SolveOutcome::Unsat,
            Search::TimedOut => SolveOutcome::BudgetExceeded,
        }
    }
}

/// Solves `inverted` together with every requirement transitively sharing
/// an offset with it. Offsets at or beyond `frame` are fixed at zero.
fn solve_component(
    inverted: &Requirement,
    others: &[Requirement],
    bytes: &[u8],
    frame: usize,
    deadline: Instant,
) -> Search {
    let mut members: Vec<&Requirement> = vec![inverted];
    let mut offsets: BTreeSet<usize> = inverted.offsets.iter().copied().collect();
    let mut taken = vec![false; others.len()];
    loop {
        let mut grew = false;
        for (i, r) in others.iter().enumerate() {
            if !taken[i] && r.offsets.iter().any(|o| offsets.contains(o)) {
                taken[i] = true;
                members.push(r);
                offsets.extend(r.offsets.iter().copied());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }

    // Requirements whose bytes are all outside the frame are constants.
    let vars: Vec<usize> = offsets.iter().copied().filter(|&o| o < frame).collect();
    let fixed_ok = members.iter().all(|r| {
        if r.offsets.iter().any(|&o| o < frame) {
            return true;
        }
        r.admits_range(0, 0)
    });
    if !fixed_ok {
        return Search::Exhausted;
    }
    let touching = vars
        .iter()
        .map(|v| {
            members
                .iter()
                .enumerate()
                .filter(|(_, r)| r.offsets.contains(v))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut problem = Problem {
        reqs: members,
        vars,
        touching,
        deadline,
        nodes: 0,
    };
    let mut work = bytes.to_vec();
    problem.search(&mut work, 0)
}

/// Solves a single system with a fresh budget.
pub fn solve(system: &ConstraintSystem, base_input: &[u8], budget: &ExplorerBudget) -> SolveOutcome {
    Solver::new(budget.clone()).solve(system, base_input)
}
