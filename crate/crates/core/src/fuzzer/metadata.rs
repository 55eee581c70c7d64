//! Seed metadata sidecars.
//!
//! Every seed `dir/<name>` is accompanied by `dir/.<name>.metadata`, a
//! single-line JSON object followed by a newline, with keys in this order:
//!
//! ```text
//! {"is_interesting_ets":true,"is_interesting_map":false,"ets_trace":[0,3,4],"reached_targets":["a.c:10"],"is_crash":false,"is_timeout":false}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{IoContext, Result};
use crate::fsutil::write_atomic;
use crate::program::BlockId;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedMetadata {
    pub is_interesting_ets: bool,
    pub is_interesting_map: bool,
    pub ets_trace: Vec<BlockId>,
    pub reached_targets: Vec<String>,
    pub is_crash: bool,
    pub is_timeout: bool,
}

impl SeedMetadata {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("metadata always serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(seed_path: &Path) -> Result<Self> {
        let path = sidecar_path(seed_path);
        let text = fs::read_to_string(&path).at(&path)?;
        Self::from_json(&text)
    }
}

/// `dir/.<name>.metadata` for the seed at `dir/<name>`.
pub fn sidecar_path(seed_path: &Path) -> PathBuf {
    let name = seed_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    seed_path.with_file_name(format!(".{name}.metadata"))
}

/// Writes the sidecar first and the seed second, so a visible seed always
/// has its metadata.
pub fn store_seed(dir: &Path, name: &str, bytes: &[u8], meta: &SeedMetadata) -> Result<PathBuf> {
    write_atomic(dir, &format!(".{name}.metadata"), meta.to_json().as_bytes())?;
    write_atomic(dir, name, bytes)
}
