//! Objective minimization (one representative per ETS trace) and sorting
//! into per-target directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use super::queue::creation_millis;
use crate::error::{IoContext, Result};
use crate::fsutil::{file_name, list_seed_files};
use crate::fuzzer::{sidecar_path, SeedMetadata};
use crate::program::{BlockId, TargetPoint};

pub const ARCHIVE_DIR: &str = "archived";
pub const CRASH_DIR: &str = "crashes";
pub const TIMEOUT_DIR: &str = "timeouts";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectiveRecord {
    pub seed_path: PathBuf,
    pub metadata: SeedMetadata,
}

#[derive(Debug, Clone, Default)]
pub struct Minimization {
    pub kept: Vec<ObjectiveRecord>,
    /// Non-representatives, at their new location under `archived/`.
    pub archived: Vec<PathBuf>,
    /// Objectives kept because their metadata could not be read.
    pub unreadable: Vec<PathBuf>,
}

impl Minimization {
    pub fn kept_count(&self) -> usize {
        self.kept.len() + self.unreadable.len()
    }
}

fn move_file(from: &Path, to_dir: &Path) -> Result<PathBuf> {
    let dest = to_dir.join(file_name(from));
    fs::rename(from, &dest).at(from)?;
    Ok(dest)
}

/// Keeps the earliest objective of each distinct ETS trace and moves the
/// rest, with their sidecars, into `archived/`.
pub fn minimize_objectives(objective_dir: &Path) -> Result<Minimization> {
    let mut out = Minimization::default();
    let mut clusters: BTreeMap<Vec<BlockId>, Vec<(u64, ObjectiveRecord)>> = BTreeMap::new();
    for path in list_seed_files(objective_dir)? {
        let metadata = match SeedMetadata::load(&path) {
            Ok(m) => m,
            Err(e) => {
                warn!("keeping {} unconditionally: {e}", path.display());
                out.unreadable.push(path);
                continue;
            }
        };
        let created = fs::metadata(&path).map(|m| creation_millis(&m)).at(&path)?;
        clusters
            .entry(metadata.ets_trace.clone())
            .or_default()
            .push((created, ObjectiveRecord { seed_path: path, metadata }));
    }

    let archive = objective_dir.join(ARCHIVE_DIR);
    for (_, mut members) in clusters {
        members.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.seed_path.cmp(&b.1.seed_path)));
        let mut members = members.into_iter().map(|(_, r)| r);
        out.kept.extend(members.next());
        for r in members {
            fs::create_dir_all(&archive).at(&archive)?;
            let sidecar = sidecar_path(&r.seed_path);
            if sidecar.exists() {
                move_file(&sidecar, &archive)?;
            }
            out.archived.push(move_file(&r.seed_path, &archive)?);
        }
    }
    out.kept.sort_by(|a, b| a.seed_path.cmp(&b.seed_path));
    Ok(out)
}

/// Directory name for a target location: `:` and `/` become `_`.
pub fn sanitize_location(location: &str) -> String {
    location.replace([':', '/'], "_")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SortReport {
    /// Directory name to copied seed names.
    pub placements: BTreeMap<String, Vec<String>>,
}

/// Where an objective belongs: one directory per configured target it
/// reached, or `crashes/` / `timeouts/` when it reached none.
pub fn destinations(meta: &SeedMetadata, targets: &[TargetPoint]) -> Vec<String> {
    let mut dirs: Vec<String> = Vec::new();
    for t in targets {
        let name = sanitize_location(&t.location);
        if meta.reached_targets.contains(&t.location) && !dirs.contains(&name) {
            dirs.push(name);
        }
    }
    if meta.reached_targets.is_empty() {
        if meta.is_crash {
            dirs.push(CRASH_DIR.into());
        } else if meta.is_timeout {
            dirs.push(TIMEOUT_DIR.into());
        }
    }
    dirs
}

/// Copies every kept objective and its sidecar into its destinations
/// under `out_dir`.
pub fn sort_objectives(kept: &[ObjectiveRecord], targets: &[TargetPoint], out_dir: &Path) -> Result<SortReport> {
    let mut report = SortReport::default();
    for r in kept {
        for dir_name in destinations(&r.metadata, targets) {
            let dir = out_dir.join(&dir_name);
            fs::create_dir_all(&dir).at(&dir)?;
            let name = file_name(&r.seed_path);
            fs::copy(&r.seed_path, dir.join(&name)).at(&r.seed_path)?;
            let sidecar = sidecar_path(&r.seed_path);
            fs::copy(&sidecar, sidecar_path(&dir.join(&name))).at(&sidecar)?;
            report.placements.entry(dir_name).or_default().push(name);
        }
    }
    Ok(report)
}
