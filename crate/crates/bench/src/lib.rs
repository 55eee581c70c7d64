//! Benchmark fixtures.

use std::path::PathBuf;

use hyfuzz::orchestrator::PriorityEntry;
use hyfuzz::{parse_program, ProgramModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn program(name: &str) -> ProgramModel {
    let text = match name {
        "magic4" => include_str!("../../../programs/magic4.toml"),
        "nested" => include_str!("../../../programs/nested.toml"),
        "multi" => include_str!("../../../programs/multi.toml"),
        "plain" => include_str!("../../../programs/plain.toml"),
        other => panic!("no fixture program {other}"),
    };
    parse_program(text).expect("fixture parses")
}

/// `n` queue entries with many ties.
pub fn queue_entries(n: usize, seed: u64) -> Vec<PriorityEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| PriorityEntry {
            is_interesting_ets: rng.random_bool(0.2),
            is_interesting_map: rng.random_bool(0.5),
            file_score: f64::from(rng.random_range(0..64u32)),
            seed_path: PathBuf::from(format!("corpus/w0-{i:06}")),
        })
        .collect()
}
