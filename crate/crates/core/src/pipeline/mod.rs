//! Corpus ingestion, splitting, and the staged parse -> mine -> constraints
//! -> evaluate -> report pipeline with persisted, provenance-stamped artifacts.

mod artifacts;
mod config;
mod corpus;
mod split;
mod titles;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::causal::order_constraints;
use crate::error::{Error, Result};
use crate::glossary::{EmbeddingTable, Glossary};
use crate::metrics::{evaluate, load_instances, load_pairs, render_table, EvalInputs};
use crate::miner::{
    categorize, export_annotation_queue, import_annotations, load_annotation_records,
    pair_frequencies, PhraseBook, PivotActionSet, PivotSelection,
};
use crate::parser::{parse_recipe, read_sequences, DependencyAnnotations, ProtoActionSequence};

pub use artifacts::{
    partial_path, read_json, sha256_file, write_atomic, write_json, CategoryCounts,
    ConstraintsArtifact, InputRecord, PivotsArtifact, ReportArtifact, SplitArtifact,
    StageProvenance, CONSTRAINTS, PARSED, PARSED_PROVENANCE, PARTIAL_SUFFIX, PIVOTS, QUEUE_DIR,
    REPORT_JSON, REPORT_TXT, SPLIT,
};
pub use config::PipelineConfig;
pub use corpus::{load_corpus, read_corpus, Corpus, CorpusStats, LoadIssue};
pub use split::{pair_support_warnings, split, validate_pairs, EvalSkeleton, Split, SplitSpec};
pub use titles::{map_titles, TitleMatch, TitleRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Parse,
    Mine,
    Constraints,
    Evaluate,
    Report,
}

impl Stage {
    pub fn all() -> Vec<Stage> {
        vec![Stage::Parse, Stage::Mine, Stage::Constraints, Stage::Evaluate, Stage::Report]
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Mine => "mine",
            Stage::Constraints => "constraints",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }

    /// Files (relative to the output directory) whose presence marks the stage done.
    pub fn artifacts(self) -> &'static [&'static str] {
        match self {
            Stage::Parse => &[PARSED, PARSED_PROVENANCE, SPLIT],
            Stage::Mine => &[PIVOTS],
            Stage::Constraints => &[CONSTRAINTS],
            Stage::Evaluate => &[REPORT_JSON],
            Stage::Report => &[REPORT_TXT],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::all()
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stage {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Skip stages whose artifacts already exist.
    pub resume: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub executed: Vec<Stage>,
    pub skipped: Vec<Stage>,
}

/// Runs the requested stages in dependency order.
///
/// Each failure is wrapped in [`Error::Stage`] naming the stage. Artifacts are
/// written to `<name>.partial` and renamed once complete.
pub fn run_pipeline(cfg: &PipelineConfig, stages: &[Stage], opts: RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    let mut ordered = stages.to_vec();
    ordered.sort();
    ordered.dedup();
    let mut summary = RunSummary::default();
    for stage in ordered {
        let done = stage.artifacts().iter().all(|a| cfg.out_path(a).exists());
        if opts.resume && done {
            log::info!("stage {stage}: artifacts present, skipping");
            summary.skipped.push(stage);
            continue;
        }
        log::info!("stage {stage}: running");
        run_stage(cfg, stage).map_err(|e| Error::Stage {
            stage: stage.name().to_string(),
            source: Box::new(e),
        })?;
        summary.executed.push(stage);
    }
    Ok(summary)
}

fn run_stage(cfg: &PipelineConfig, stage: Stage) -> Result<()> {
    match stage {
        Stage::Parse => stage_parse(cfg),
        Stage::Mine => stage_mine(cfg),
        Stage::Constraints => stage_constraints(cfg),
        Stage::Evaluate => stage_evaluate(cfg),
        Stage::Report => stage_report(cfg),
    }
}

// Collects input hashes for a stage's provenance block.
struct Inputs<'a> {
    cfg: &'a PipelineConfig,
    records: BTreeMap<String, InputRecord>,
}

impl<'a> Inputs<'a> {
    fn new(cfg: &'a PipelineConfig) -> Self {
        Inputs {
            cfg,
            records: BTreeMap::new(),
        }
    }

    /// Resolves and hashes a config-named input.
    fn config_file(&mut self, name: &str, given: &Path) -> Result<PathBuf> {
        let path = self.cfg.resolve(given);
        self.records.insert(
            name.to_string(),
            InputRecord {
                path: given.to_string_lossy().into_owned(),
                sha256: sha256_file(&path)?,
            },
        );
        Ok(path)
    }

    fn required(&mut self, name: &'static str, value: &Option<PathBuf>) -> Result<PathBuf> {
        let given = value
            .as_deref()
            .ok_or_else(|| Error::Schema(format!("config does not name the {name} input")))?;
        self.config_file(name, given)
    }

    /// Resolves and hashes an artifact of an earlier stage.
    fn artifact(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.cfg.out_path(name);
        self.records.insert(
            name.to_string(),
            InputRecord {
                path: name.to_string(),
                sha256: sha256_file(&path)?,
            },
        );
        Ok(path)
    }

    fn provenance(self, stage: Stage, config: serde_json::Value) -> StageProvenance {
        StageProvenance {
            stage,
            toolkit_version: crate::TOOLKIT_VERSION.to_string(),
            seed: self.cfg.seed,
            config,
            inputs: self.records,
        }
    }
}

fn load_parses(inputs: &mut Inputs, cfg: &PipelineConfig) -> Result<Option<DependencyAnnotations>> {
    cfg.dependency_parses
        .as_deref()
        .map(|p| inputs.config_file("dependency_parses", p).and_then(DependencyAnnotations::load))
        .transpose()
}

fn stage_parse(cfg: &PipelineConfig) -> Result<()> {
    let mut inputs = Inputs::new(cfg);
    let corpus_path = inputs.required("corpus", &cfg.corpus)?;
    let glossary = Glossary::load(inputs.required("glossary", &cfg.glossary)?)?;
    let pairs = load_pairs(inputs.required("pairs", &cfg.pairs)?)?;
    let parses = load_parses(&mut inputs, cfg)?;
    let (corpus, load_issues) = load_corpus(&corpus_path, cfg.strict)?;

    let spec = SplitSpec {
        dish_pairs: pairs.clone(),
        eval_sample_size: cfg.eval_sample_size,
        seed: cfg.seed,
    };
    let sp = split(&corpus, &spec)?;
    let warnings = pair_support_warnings(&corpus, &pairs, cfg.min_recipes_per_dish);
    for w in &warnings {
        log::warn!("{w}");
    }

    let mut lines = String::new();
    for r in corpus.recipes.values() {
        let dep = parses.as_ref().and_then(|p| p.for_recipe(&r.recipe_id));
        lines.push_str(&parse_recipe(r, &glossary, dep, cfg.extract)?.to_json_line());
        lines.push('\n');
    }

    let provenance = inputs.provenance(
        Stage::Parse,
        serde_json::json!({
            "strict": cfg.strict,
            "eval_sample_size": cfg.eval_sample_size,
            "min_recipes_per_dish": cfg.min_recipes_per_dish,
            "extract": cfg.extract,
        }),
    );
    let dishes = pairs
        .iter()
        .flat_map(|p| [&p.base_dish, &p.target_dish])
        .map(|d| (d.clone(), corpus.by_dish[d].clone()))
        .collect();
    let split_artifact = SplitArtifact {
        provenance: provenance.clone(),
        stats: corpus.stats(),
        finetune_stats: sp.finetune.stats(),
        load_issues,
        warnings,
        undersampled: sp.undersampled,
        dishes,
        eval: sp.eval,
        finetune_recipe_ids: sp.finetune.recipes.keys().cloned().collect(),
    };
    write_atomic(&cfg.out_path(PARSED), lines.as_bytes())?;
    write_json(&cfg.out_path(PARSED_PROVENANCE), &provenance)?;
    write_json(&cfg.out_path(SPLIT), &split_artifact)
}

struct Parsed {
    sequences: BTreeMap<String, ProtoActionSequence>,
    split: SplitArtifact,
}

impl Parsed {
    fn load(inputs: &mut Inputs) -> Result<Self> {
        let sequences = read_sequences(inputs.artifact(PARSED)?)?
            .into_iter()
            .map(|s| (s.recipe_id.clone(), s))
            .collect();
        let split = read_json(&inputs.artifact(SPLIT)?)?;
        Ok(Parsed { sequences, split })
    }

    fn dish(&self, dish: &str) -> Result<Vec<ProtoActionSequence>> {
        let ids = self
            .split
            .dishes
            .get(dish)
            .ok_or_else(|| Error::UnknownDish(dish.to_string()))?;
        ids.iter()
            .map(|id| {
                self.sequences.get(id).cloned().ok_or_else(|| {
                    Error::Schema(format!("recipe {id} missing from {PARSED}"))
                })
            })
            .collect()
    }
}

fn check_file_safe(pair_id: &str) -> Result<()> {
    if pair_id.contains(['/', '\\']) || pair_id.starts_with('.') {
        return Err(Error::Schema(format!(
            "pair_id {pair_id:?} cannot be used as a file name"
        )));
    }
    Ok(())
}

fn stage_mine(cfg: &PipelineConfig) -> Result<()> {
    let mut inputs = Inputs::new(cfg);
    let parsed = Parsed::load(&mut inputs)?;
    let pairs = load_pairs(inputs.required("pairs", &cfg.pairs)?)?;
    if let Some(unknown) = cfg.annotations.keys().find(|k| !pairs.iter().any(|p| &&p.pair_id == k)) {
        return Err(Error::UnknownPair(unknown.clone()));
    }

    let queue_dir = cfg.out_path(QUEUE_DIR);
    let queue_tmp = partial_path(&queue_dir);
    if queue_tmp.exists() {
        std::fs::remove_dir_all(&queue_tmp).map_err(|e| Error::io(&queue_tmp, e))?;
    }
    std::fs::create_dir_all(&queue_tmp).map_err(|e| Error::io(&queue_tmp, e))?;

    let mut categories = BTreeMap::new();
    let mut pivots = BTreeMap::new();
    for pair in &pairs {
        check_file_safe(&pair.pair_id)?;
        let base = parsed.dish(&pair.base_dish)?;
        let target = parsed.dish(&pair.target_dish)?;
        let freqs = pair_frequencies(&base, &target)?;
        let cat = categorize(&freqs, &cfg.mining);
        let queue = queue_tmp.join(format!("{}.csv", pair.pair_id));
        let seed = crate::derive_seed(cfg.seed, &format!("mine/{}", pair.pair_id));
        let queued = export_annotation_queue(&cat, &target, &base, &queue, seed)?;
        let selection = match cfg.annotations.get(&pair.pair_id) {
            Some(results) => {
                let results = inputs.config_file(&format!("annotations/{}", pair.pair_id), results)?;
                import_annotations(&cat, &load_annotation_records(&queue, &results)?)?
            }
            None => {
                if queued > 0 {
                    log::info!(
                        "pair {}: {queued} actions need manual checking and are dropped without annotations",
                        pair.pair_id
                    );
                }
                PivotSelection::automatic(&cat)
            }
        };
        let phrases = PhraseBook::from_sequences(base.iter().chain(&target));
        let set = PivotActionSet::new(&pair.pair_id, selection, cfg.mining, &phrases)?;
        categories.insert(
            pair.pair_id.clone(),
            CategoryCounts {
                actions: freqs.len(),
                remove: cat.remove.len(),
                insert: cat.insert.len(),
                manual: cat.manual.len(),
                discarded: freqs.len() - cat.remove.len() - cat.insert.len() - cat.manual.len(),
            },
        );
        pivots.insert(pair.pair_id.clone(), set);
    }

    if queue_dir.exists() {
        std::fs::remove_dir_all(&queue_dir).map_err(|e| Error::io(&queue_dir, e))?;
    }
    std::fs::rename(&queue_tmp, &queue_dir).map_err(|e| Error::io(&queue_dir, e))?;

    let provenance = inputs.provenance(Stage::Mine, serde_json::json!({ "mining": cfg.mining }));
    write_json(
        &cfg.out_path(PIVOTS),
        &PivotsArtifact {
            provenance,
            categories,
            pivots,
        },
    )
}

fn stage_constraints(cfg: &PipelineConfig) -> Result<()> {
    let mut inputs = Inputs::new(cfg);
    let parsed = Parsed::load(&mut inputs)?;
    let pivots: PivotsArtifact = read_json(&inputs.artifact(PIVOTS)?)?;
    let pairs = load_pairs(inputs.required("pairs", &cfg.pairs)?)?;
    let mut constraints = BTreeMap::new();
    for pair in &pairs {
        let set = pivots
            .pivots
            .get(&pair.pair_id)
            .ok_or_else(|| Error::Schema(format!("{PIVOTS} has no entry for pair {}", pair.pair_id)))?;
        let target = parsed.dish(&pair.target_dish)?;
        constraints.insert(pair.pair_id.clone(), order_constraints(set, &target, &cfg.causal)?);
    }
    let provenance =
        inputs.provenance(Stage::Constraints, serde_json::json!({ "causal": cfg.causal }));
    write_json(
        &cfg.out_path(CONSTRAINTS),
        &ConstraintsArtifact {
            provenance,
            constraints,
        },
    )
}

fn stage_evaluate(cfg: &PipelineConfig) -> Result<()> {
    let mut inputs = Inputs::new(cfg);
    let instances = load_instances(inputs.required("generated", &cfg.generated)?)?;
    let pairs = load_pairs(inputs.required("pairs", &cfg.pairs)?)?;
    let glossary = Glossary::load(inputs.required("glossary", &cfg.glossary)?)?;
    let embeddings = EmbeddingTable::load(inputs.required("embeddings", &cfg.embeddings)?)?;
    let parses = load_parses(&mut inputs, cfg)?;
    let pivots: PivotsArtifact = read_json(&inputs.artifact(PIVOTS)?)?;
    let constraints: ConstraintsArtifact = read_json(&inputs.artifact(CONSTRAINTS)?)?;
    let split: SplitArtifact = read_json(&inputs.artifact(SPLIT)?)?;

    let outside = instances
        .iter()
        .filter(|i| {
            !split
                .eval
                .iter()
                .any(|e| e.pair_id == i.pair_id && e.base_recipe_id == i.base_recipe.recipe_id)
        })
        .count();
    if outside > 0 {
        log::warn!("{outside} evaluation instances use base recipes outside the evaluation split");
    }

    let eval_inputs = EvalInputs {
        pairs: &pairs,
        pivots: &pivots.pivots,
        constraints: &constraints.constraints,
        glossary: &glossary,
        embeddings: &embeddings,
        parses: parses.as_ref(),
        extract: cfg.extract,
    };
    let mut report = evaluate(&instances, &eval_inputs, &cfg.metrics)?;
    report.provenance.inputs = inputs
        .records
        .iter()
        .map(|(k, v)| (k.clone(), v.sha256.clone()))
        .collect();
    let provenance = inputs.provenance(
        Stage::Evaluate,
        serde_json::json!({ "metrics": cfg.metrics, "extract": cfg.extract }),
    );
    write_json(&cfg.out_path(REPORT_JSON), &ReportArtifact { provenance, report })
}

fn stage_report(cfg: &PipelineConfig) -> Result<()> {
    let mut inputs = Inputs::new(cfg);
    let artifact: ReportArtifact = read_json(&inputs.artifact(REPORT_JSON)?)?;
    let mut text = render_table(&artifact.report);
    text.push('\n');
    text.push_str(&format!("toolkit {}\n", artifact.provenance.toolkit_version));
    for (name, rec) in &artifact.provenance.inputs {
        text.push_str(&format!("input {name} {} sha256:{}\n", rec.path, rec.sha256));
    }
    write_atomic(&cfg.out_path(REPORT_TXT), text.as_bytes())
}
