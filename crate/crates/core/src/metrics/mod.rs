//! Scores for generated counterfactual recipes.
//!
//! Surface level: ingredient coverage ([`coverage_of_ingredients`]), BLEU and
//! `embed_sim` against the base recipe. Action level: hard and soft
//! precision/recall/F1 between the model's changes and the mined pivots, with
//! order checking. Human ratings: Best-Worst Scaling ([`bws_score`]).

mod actions;
mod bleu;
mod bws;
mod coverage;
mod report;
mod similarity;
mod text;

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glossary::ClassId;
use crate::parser::RecipeText;

pub use actions::{
    check_order, diff_actions, greedy_matching, hard_prf, soft_match, ActionScores, Change, PrfSummary,
    ChangeSet, OrderTally, Prf, Side, SoftMatch, SoftMatching,
};
pub use bleu::{bleu, Smoothing};
pub use bws::{bws_score, read_ratings, Rating};
pub use coverage::{coverage_of_ingredients, ingredient_present, Coverage};
pub use report::{
    evaluate, render_table, AggregateScores, EvalInputs, EvalReport, InstanceScores,
    ReportProvenance,
};
pub use similarity::{embed_sim_score, phrase_similarity, Scored};
pub use text::{is_cjk, tokenize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChangeKind {
    Replace,
    Add,
}

/// An ingredient named by its canonical string and glossary class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngredientRef {
    pub name: String,
    pub class_id: ClassId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DishPair {
    pub pair_id: String,
    pub base_dish: String,
    pub target_dish: String,
    pub change_kind: ChangeKind,
    #[serde(default)]
    pub removed_ingredient: Option<IngredientRef>,
    pub added_ingredient: IngredientRef,
}

impl DishPair {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Schema(format!("dish pair {}: {msg}", self.pair_id)));
        if self.pair_id.trim().is_empty() {
            return Err(Error::Schema("dish pair with empty pair_id".into()));
        }
        if self.base_dish.trim().is_empty() || self.target_dish.trim().is_empty() {
            return bad("dish names must be non-empty");
        }
        if self.base_dish == self.target_dish {
            return bad("base and target dish are the same");
        }
        if self.added_ingredient.name.trim().is_empty() {
            return bad("added ingredient has an empty name");
        }
        match (self.change_kind, &self.removed_ingredient) {
            (ChangeKind::Replace, None) => bad("Replace pair needs a removed_ingredient"),
            (ChangeKind::Add, Some(_)) => bad("Add pair must not name a removed_ingredient"),
            (ChangeKind::Replace, Some(r)) if r.name.trim().is_empty() => {
                bad("removed ingredient has an empty name")
            }
            _ => Ok(()),
        }
    }
}

/// Reads a JSON array of dish pairs, validating each and rejecting duplicate ids.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<DishPair>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let pairs: Vec<DishPair> =
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
    let mut seen = BTreeSet::new();
    for p in &pairs {
        p.validate()?;
        if !seen.insert(p.pair_id.as_str()) {
            return Err(Error::Schema(format!("duplicate pair_id {:?}", p.pair_id)));
        }
    }
    Ok(pairs)
}

/// A base recipe and a model's rewrite of it for one dish pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalInstance {
    pub pair_id: String,
    pub base_recipe: RecipeText,
    pub generated_recipe: RecipeText,
}

impl EvalInstance {
    pub fn validate(&self) -> Result<()> {
        self.base_recipe.validate()?;
        self.generated_recipe.validate()
    }
}

/// Reads evaluation instances from JSONL, one instance per non-blank line.
pub fn load_instances(path: impl AsRef<Path>) -> Result<Vec<EvalInstance>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: EvalInstance = serde_json::from_str(&line)
            .map_err(|e| Error::json(format!("{}:{}", path.display(), i + 1), e))?;
        inst.validate()?;
        out.push(inst);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// Soft matching admits pairs whose phrase similarity exceeds this.
    pub tau_s: f64,
    pub bleu_max_n: usize,
    pub smoothing: Smoothing,
    /// Count any glossary surface form of the ingredient class as coverage,
    /// not only the canonical name.
    pub expand_ingredient_forms: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            tau_s: 0.9,
            bleu_max_n: 4,
            smoothing: Smoothing::AddOne,
            expand_ingredient_forms: false,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_s > 0.0 && self.tau_s <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tau_s must lie in (0, 1], got {}",
                self.tau_s
            )));
        }
        if self.bleu_max_n == 0 {
            return Err(Error::InvalidArgument("bleu_max_n must be positive".into()));
        }
        Ok(())
    }
}
