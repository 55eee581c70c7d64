//! Filesystem helpers shared by the workers.
//!
//! Workers exchange files through directories only, so every write goes
//! through a dot-prefixed temporary and a rename. Readers ignore dotfiles.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{IoContext, Result};

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to `dir/name` so that readers never observe a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp = dir.join(format!(".tmp-{}-{n}-{name}", std::process::id()));
    let dest = dir.join(name);
    fs::write(&tmp, bytes).at(&tmp)?;
    fs::rename(&tmp, &dest).at(&dest)?;
    Ok(dest)
}

/// Regular, non-hidden files directly inside `dir`, sorted by name.
pub fn list_seed_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).at(dir)? {
        let entry = entry.at(dir)?;
        let name = entry.file_name();
        if name.to_string_lossy().starts_with('.') {
            continue;
        }
        if entry.file_type().at(entry.path())?.is_file() {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}
