use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::corpus::{CorpusStats, LoadIssue};
use super::split::EvalSkeleton;
use super::Stage;
use crate::causal::OrderConstraintSet;
use crate::error::{Error, Result};
use crate::metrics::EvalReport;
use crate::miner::PivotActionSet;

pub const PARSED: &str = "parsed.jsonl";
pub const PARSED_PROVENANCE: &str = "parsed.provenance.json";
pub const SPLIT: &str = "split.json";
pub const PIVOTS: &str = "pivots.json";
pub const QUEUE_DIR: &str = "annotation_queue";
pub const CONSTRAINTS: &str = "constraints.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";

/// Suffix marking a file or directory that is still being written.
pub const PARTIAL_SUFFIX: &str = ".partial";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    /// The path as written in the configuration, or the artifact file name.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageProvenance {
    pub stage: Stage,
    pub toolkit_version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, InputRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitArtifact {
    pub provenance: StageProvenance,
    pub stats: CorpusStats,
    pub finetune_stats: CorpusStats,
    pub load_issues: Vec<LoadIssue>,
    pub warnings: Vec<String>,
    pub undersampled: Vec<String>,
    /// Recipe ids of every dish named in a pair.
    pub dishes: BTreeMap<String, Vec<String>>,
    pub eval: Vec<EvalSkeleton>,
    pub finetune_recipe_ids: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub actions: usize,
    pub remove: usize,
    pub insert: usize,
    pub manual: usize,
    pub discarded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotsArtifact {
    pub provenance: StageProvenance,
    pub categories: BTreeMap<String, CategoryCounts>,
    pub pivots: BTreeMap<String, PivotActionSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintsArtifact {
    pub provenance: StageProvenance,
    pub constraints: BTreeMap<String, OrderConstraintSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportArtifact {
    pub provenance: StageProvenance,
    pub report: EvalReport,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(PARTIAL_SUFFIX);
    PathBuf::from(s)
}

/// Writes `<path>.partial` and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = partial_path(path);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}
