//! Pivot-action mining for a (base dish, target dish) pair.
//!
//! Every action seen in at least one recipe of either dish gets a document
//! frequency per dish. Frequency ratios and thresholds sort actions into
//! automatic removals, automatic insertions, and a queue for annotators;
//! annotator votes then settle the queue by strict majority.

mod annotation;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parser::{ProtoAction, ProtoActionSequence};

pub use annotation::{
    build_annotation_queue, export_annotation_queue, import_annotations, load_annotation_records,
    queue_companion_path, read_annotation_results, AnnotationRecord, Label, QueueEntry, Vote,
    VoteCounts, FLAG_DUPLICATED, FLAG_FROM_BASE,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiningConfig {
    pub alpha: f64,
    pub tau_r: f64,
    pub tau_i: f64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            alpha: 5.0,
            tau_r: 0.01,
            tau_i: 0.1,
        }
    }
}

impl MiningConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha > 1.0
            && self.tau_r > 0.0
            && self.tau_i < 1.0
            && self.tau_r < self.tau_i;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "mining config needs alpha > 1 and 0 < tau_r < tau_i < 1, got {self:?}"
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionFrequency {
    pub action: ProtoAction,
    pub f_b: f64,
    pub f_t: f64,
    pub n_b: usize,
    pub n_t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Remove,
    Insert,
    Manual,
    Discard,
}

/// Fraction of recipes containing the action at least once.
pub fn action_frequency(recipes: &[ProtoActionSequence], action: &ProtoAction) -> Result<f64> {
    if recipes.is_empty() {
        return Err(Error::EmptyInput("recipe list for frequency"));
    }
    let hits = recipes.iter().filter(|r| r.contains(action)).count();
    Ok(hits as f64 / recipes.len() as f64)
}

fn document_counts(recipes: &[ProtoActionSequence]) -> HashMap<&ProtoAction, usize> {
    let mut counts = HashMap::new();
    for r in recipes {
        let distinct: HashSet<&ProtoAction> = r.protos().collect();
        for a in distinct {
            *counts.entry(a).or_insert(0) += 1;
        }
    }
    counts
}

/// Frequencies of every action that occurs in at least one recipe of either dish,
/// sorted by action.
pub fn pair_frequencies(
    base: &[ProtoActionSequence],
    target: &[ProtoActionSequence],
) -> Result<Vec<ActionFrequency>> {
    if base.is_empty() {
        return Err(Error::EmptyInput("base dish recipes"));
    }
    if target.is_empty() {
        return Err(Error::EmptyInput("target dish recipes"));
    }
    let cb = document_counts(base);
    let ct = document_counts(target);
    let universe: BTreeSet<&ProtoAction> = cb.keys().chain(ct.keys()).copied().collect();
    let (n_b, n_t) = (base.len(), target.len());
    Ok(universe
        .into_iter()
        .map(|a| ActionFrequency {
            action: a.clone(),
            f_b: *cb.get(a).unwrap_or(&0) as f64 / n_b as f64,
            f_t: *ct.get(a).unwrap_or(&0) as f64 / n_t as f64,
            n_b,
            n_t,
        })
        .collect())
}

/// Frequency-rule category of one action.
pub fn classify(f_b: f64, f_t: f64, cfg: &MiningConfig) -> Category {
    let base_heavy = f_b > cfg.alpha * f_t;
    let target_heavy = f_t > cfg.alpha * f_b;
    if base_heavy && f_t < cfg.tau_r {
        Category::Remove
    } else if target_heavy && f_t > cfg.tau_i {
        Category::Insert
    } else if base_heavy || target_heavy {
        Category::Manual
    } else {
        Category::Discard
    }
}

/// Automatic removals, automatic insertions, and actions left for annotators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotCategorization {
    pub remove: BTreeSet<ProtoAction>,
    pub insert: BTreeSet<ProtoAction>,
    pub manual: BTreeSet<ProtoAction>,
}

impl PivotCategorization {
    pub fn category_of(&self, action: &ProtoAction) -> Category {
        if self.remove.contains(action) {
            Category::Remove
        } else if self.insert.contains(action) {
            Category::Insert
        } else if self.manual.contains(action) {
            Category::Manual
        } else {
            Category::Discard
        }
    }
}

pub fn categorize(freqs: &[ActionFrequency], cfg: &MiningConfig) -> PivotCategorization {
    let mut out = PivotCategorization::default();
    for f in freqs {
        let a = f.action.clone();
        match classify(f.f_b, f.f_t, cfg) {
            Category::Remove => out.remove.insert(a),
            Category::Insert => out.insert.insert(a),
            Category::Manual => out.manual.insert(a),
            Category::Discard => false,
        };
    }
    out
}

/// Final removal and insertion sets before phrases are attached.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PivotSelection {
    pub remove: BTreeSet<ProtoAction>,
    pub insert: BTreeSet<ProtoAction>,
    pub vote_counts: BTreeMap<String, VoteCounts>,
    pub annotations_applied: bool,
}

impl PivotSelection {
    /// Keeps only the automatic sets; queued actions are dropped.
    pub fn automatic(cat: &PivotCategorization) -> Self {
        PivotSelection {
            remove: cat.remove.clone(),
            insert: cat.insert.clone(),
            vote_counts: BTreeMap::new(),
            annotations_applied: false,
        }
    }
}

/// Most frequent clause realization per action; ties go to the smallest string.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhraseBook {
    phrases: BTreeMap<ProtoAction, String>,
}

impl PhraseBook {
    pub fn from_sequences<'a>(seqs: impl IntoIterator<Item = &'a ProtoActionSequence>) -> Self {
        let mut counts: BTreeMap<&ProtoAction, BTreeMap<&str, usize>> = BTreeMap::new();
        for s in seqs {
            for a in &s.actions {
                *counts
                    .entry(&a.proto)
                    .or_default()
                    .entry(a.instance.clause_text.as_str())
                    .or_insert(0) += 1;
            }
        }
        let phrases = counts
            .into_iter()
            .map(|(action, texts)| {
                // count ties resolve to the smaller phrase
                let best = texts
                    .iter()
                    .max_by(|x, y| x.1.cmp(y.1).then_with(|| y.0.cmp(x.0)))
                    .map(|(t, _)| t.to_string())
                    .unwrap_or_default();
                (action.clone(), best)
            })
            .collect();
        PhraseBook { phrases }
    }

    pub fn get(&self, action: &ProtoAction) -> Option<&str> {
        self.phrases.get(action).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotAction {
    #[serde(flatten)]
    pub action: ProtoAction,
    /// Representative clause text used for soft matching.
    pub phrase: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotProvenance {
    pub config: MiningConfig,
    pub annotations_applied: bool,
    pub vote_counts: BTreeMap<String, VoteCounts>,
}

/// Finalized pivots for one dish pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotActionSet {
    pub dish_pair: String,
    pub remove: Vec<PivotAction>,
    pub insert: Vec<PivotAction>,
    pub provenance: PivotProvenance,
}

impl PivotActionSet {
    pub fn new(
        dish_pair: &str,
        selection: PivotSelection,
        cfg: MiningConfig,
        phrases: &PhraseBook,
    ) -> Result<Self> {
        if let Some(a) = selection.remove.intersection(&selection.insert).next() {
            return Err(Error::InvalidArgument(format!(
                "action {a} selected for both removal and insertion"
            )));
        }
        let attach = |set: BTreeSet<ProtoAction>| {
            set.into_iter()
                .map(|action| PivotAction {
                    phrase: phrases.get(&action).map(str::to_string).unwrap_or_else(|| action.to_string()),
                    action,
                })
                .collect()
        };
        Ok(PivotActionSet {
            dish_pair: dish_pair.to_string(),
            remove: attach(selection.remove),
            insert: attach(selection.insert),
            provenance: PivotProvenance {
                config: cfg,
                annotations_applied: selection.annotations_applied,
                vote_counts: selection.vote_counts,
            },
        })
    }

    /// Pivot set without phrases beyond each action's display form; handy in tests.
    pub fn from_actions(
        dish_pair: &str,
        remove: impl IntoIterator<Item = ProtoAction>,
        insert: impl IntoIterator<Item = ProtoAction>,
    ) -> Result<Self> {
        let selection = PivotSelection {
            remove: remove.into_iter().collect(),
            insert: insert.into_iter().collect(),
            ..Default::default()
        };
        Self::new(dish_pair, selection, MiningConfig::default(), &PhraseBook::default())
    }

    pub fn is_remove(&self, action: &ProtoAction) -> bool {
        self.remove.iter().any(|p| &p.action == action)
    }

    pub fn is_insert(&self, action: &ProtoAction) -> bool {
        self.insert.iter().any(|p| &p.action == action)
    }

    pub fn len(&self) -> usize {
        self.remove.len() + self.insert.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
