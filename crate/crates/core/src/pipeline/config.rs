use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Stage;
use crate::causal::CausalConfig;
use crate::error::{Error, Result};
use crate::metrics::MetricConfig;
use crate::miner::MiningConfig;
use crate::parser::ExtractOptions;

fn default_sample_size() -> usize {
    50
}

fn default_min_recipes() -> usize {
    10
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Pipeline configuration, usually read from one JSON file.
///
/// Relative paths are resolved against `base_dir` (the config file's
/// directory) but recorded in provenance exactly as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub glossary: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
    #[serde(default)]
    pub pairs: Option<PathBuf>,
    /// Generated recipes to score, as evaluation-instance JSONL.
    #[serde(default)]
    pub generated: Option<PathBuf>,
    /// Annotation results CSV per pair id.
    #[serde(default)]
    pub annotations: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub dependency_parses: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_sample_size")]
    pub eval_sample_size: usize,
    /// Pairs whose dishes have fewer recipes are reported in the split artifact.
    #[serde(default = "default_min_recipes")]
    pub min_recipes_per_dish: usize,
    #[serde(default)]
    pub extract: ExtractOptions,
    #[serde(default)]
    pub mining: MiningConfig,
    #[serde(default)]
    pub causal: CausalConfig,
    #[serde(default)]
    pub metrics: MetricConfig,
    #[serde(default = "Stage::all")]
    pub stages: Vec<Stage>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig =
            serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.mining.validate()?;
        self.causal.validate()?;
        self.metrics.validate()?;
        if self.eval_sample_size == 0 {
            return Err(Error::InvalidArgument("eval_sample_size must be positive".into()));
        }
        Ok(())
    }

    /// `path` joined onto the config directory unless absolute.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.resolve(&self.out_dir).join(name)
    }

    /// Resolved path of a required input, or a schema error naming the field.
    pub fn input(&self, field: &'static str, value: &Option<PathBuf>) -> Result<PathBuf> {
        value
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::Schema(format!("config does not name the {field} input")))
    }
}
