//! The explorer's seed priority queue.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::warn;

use crate::error::{IoContext, Result};
use crate::fsutil::list_seed_files;
use crate::fuzzer::SeedMetadata;

#[derive(Debug, Clone, PartialEq)]
pub struct PriorityEntry {
    pub is_interesting_ets: bool,
    pub is_interesting_map: bool,
    /// Creation time in epoch milliseconds over size in bytes.
    pub file_score: f64,
    pub seed_path: PathBuf,
}

impl PriorityEntry {
    /// Builds an entry from the seed's sidecar and filesystem metadata.
    pub fn from_seed(seed_path: &Path) -> Result<Self> {
        let meta = SeedMetadata::load(seed_path)?;
        let fs_meta = std::fs::metadata(seed_path).at(seed_path)?;
        Ok(PriorityEntry {
            is_interesting_ets: meta.is_interesting_ets,
            is_interesting_map: meta.is_interesting_map,
            file_score: file_score(creation_millis(&fs_meta), fs_meta.len()),
            seed_path: seed_path.to_path_buf(),
        })
    }
}

pub fn file_score(created_at_millis: u64, size: u64) -> f64 {
    created_at_millis as f64 / size.max(1) as f64
}

/// Creation time where the filesystem records it, otherwise modification
/// time.
pub fn creation_millis(meta: &std::fs::Metadata) -> u64 {
    let t = meta.created().or_else(|_| meta.modified()).unwrap_or(UNIX_EPOCH);
    t.duration_since(SystemTime::UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// `Greater` means `a` is explored first: ETS flag, then coverage flag,
/// then larger file score; remaining ties go to the lexicographically
/// smaller path.
pub fn compare_priority(a: &PriorityEntry, b: &PriorityEntry) -> Ordering {
    a.is_interesting_ets
        .cmp(&b.is_interesting_ets)
        .then(a.is_interesting_map.cmp(&b.is_interesting_map))
        .then(a.file_score.total_cmp(&b.file_score))
        .then_with(|| b.seed_path.cmp(&a.seed_path))
}

#[derive(Debug, Clone)]
struct Ranked(PriorityEntry);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        compare_priority(&self.0, &other.0) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_priority(&self.0, &other.0)
    }
}

/// Binary max-heap under [`compare_priority`].
#[derive(Debug, Clone, Default)]
pub struct SeedQueue {
    heap: BinaryHeap<Ranked>,
}

impl SeedQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: PriorityEntry) {
        self.heap.push(Ranked(entry));
    }

    pub fn pop(&mut self) -> Option<PriorityEntry> {
        self.heap.pop().map(|r| r.0)
    }

    pub fn peek(&self) -> Option<&PriorityEntry> {
        self.heap.peek().map(|r| &r.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// Pushes every seed in `corpus_dir` not yet in `seen`. Seeds whose
/// sidecar is missing or corrupt are skipped and retried next time.
pub fn enqueue_corpus_updates(queue: &mut SeedQueue, corpus_dir: &Path, seen: &mut HashSet<PathBuf>) -> Result<usize> {
    let mut added = 0;
    for path in list_seed_files(corpus_dir)? {
        if seen.contains(&path) {
            continue;
        }
        match PriorityEntry::from_seed(&path) {
            Ok(entry) => {
                queue.push(entry);
                seen.insert(path);
                added += 1;
            }
            Err(e) => warn!("skipping {}: {e}", path.display()),
        }
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzer::store_seed;

    fn entry(ets: bool, map: bool, fs: f64, path: &str) -> PriorityEntry {
        PriorityEntry {
            is_interesting_ets: ets,
            is_interesting_map: map,
            file_score: fs,
            seed_path: PathBuf::from(path),
        }
    }

    #[test]
    fn ets_outranks_coverage() {
        let a = entry(true, false, 1.0, "a");
        let b = entry(false, true, 1e6, "b");
        assert_eq!(compare_priority(&a, &b), Ordering::Greater);
    }

    #[test]
    fn larger_file_score_wins() {
        let a = entry(true, true, 5.0, "a");
        let b = entry(true, true, 7.0, "b");
        assert_eq!(compare_priority(&a, &b), Ordering::Less);
        assert_eq!(compare_priority(&a, &a.clone()), Ordering::Equal);
    }

    #[test]
    fn heap_pops_in_priority_order() {
        let mut q = SeedQueue::new();
        for e in [
            entry(false, false, 3.0, "c"),
            entry(true, false, 1.0, "a"),
            entry(false, true, 2.0, "b"),
            entry(false, true, 2.0, "a"),
        ] {
            q.push(e);
        }
        let order: Vec<_> = std::iter::from_fn(|| q.pop()).map(|e| e.seed_path).collect();
        assert_eq!(order, ["a", "a", "b", "c"].map(PathBuf::from));
    }

    #[test]
    fn corpus_updates_are_deduplicated() {
        let dir = tempfile::tempdir().unwrap();
        let mut q = SeedQueue::new();
        let mut seen = HashSet::new();
        assert_eq!(enqueue_corpus_updates(&mut q, dir.path(), &mut seen).unwrap(), 0);
        let meta = SeedMetadata {
            is_interesting_map: true,
            ..SeedMetadata::default()
        };
        for name in ["x", "y", "z"] {
            store_seed(dir.path(), name, b"abc", &meta).unwrap();
        }
        std::fs::write(dir.path().join("orphan"), b"no sidecar").unwrap();
        assert_eq!(enqueue_corpus_updates(&mut q, dir.path(), &mut seen).unwrap(), 3);
        assert_eq!(enqueue_corpus_updates(&mut q, dir.path(), &mut seen).unwrap(), 0);
        assert_eq!(q.len(), 3);
        assert!(q.peek().unwrap().is_interesting_map);
    }
}
