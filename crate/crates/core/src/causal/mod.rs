//! Order constraints for pivot actions from matched causal effects.
//!
//! For an insertion pivot `a`, every action `a'` seen before `a` in the
//! target dish's recipes is a candidate cause; every action seen after it is
//! a candidate effect. Each (cause, effect) pair is turned into one unit per
//! recipe, propensity scores are fitted on the actions preceding both, and the
//! effect `psi` is estimated by caliper matching. Candidates whose `psi`
//! exceeds `tau_c` become predecessors (`a'` causes `a`) or successors
//! (`a` causes `a'`).

mod matching;
mod propensity;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::miner::PivotActionSet;
use crate::parser::{ProtoAction, ProtoActionSequence};

pub use matching::{matched_ate, MatchedEffect};
pub use propensity::{fit_logistic, propensity_scores, sigmoid, LogisticModel, SCORE_EPS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CausalConfig {
    pub tau_c: f64,
    pub min_support: usize,
    pub caliper: f64,
    pub lr_iters: usize,
    pub lr_rate: f64,
    pub lr_l2: f64,
}

impl Default for CausalConfig {
    fn default() -> Self {
        CausalConfig {
            tau_c: 0.1,
            min_support: 10,
            caliper: 0.05,
            lr_iters: 1000,
            lr_rate: 0.5,
            lr_l2: 0.01,
        }
    }
}

impl CausalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tau_c > 0.0
            && self.caliper > 0.0
            && self.min_support >= 1
            && self.lr_rate > 0.0
            && self.lr_l2 >= 0.0
        {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "causal config needs tau_c > 0, caliper > 0, min_support >= 1, lr_rate > 0, lr_l2 >= 0; got {self:?}"
            )))
        }
    }
}

/// One recipe's view of a (cause, effect) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalUnit {
    pub recipe_id: String,
    /// Cause occurs, and before the first effect (or the effect is absent).
    pub treatment: bool,
    /// Effect occurs after the first cause; with no cause, effect occurs at all.
    pub outcome: bool,
    /// Presence of each confounder-vocabulary action in the recipe.
    pub covariates: Vec<bool>,
}

impl CausalUnit {
    pub fn features(&self) -> Vec<f64> {
        self.covariates.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitTable {
    pub cause: ProtoAction,
    pub effect: ProtoAction,
    /// Confounder actions, sorted; `covariates[i]` refers to `vocabulary[i]`.
    pub vocabulary: Vec<ProtoAction>,
    pub units: Vec<CausalUnit>,
}

impl UnitTable {
    pub fn treated(&self) -> usize {
        self.units.iter().filter(|u| u.treatment).count()
    }

    pub fn control(&self) -> usize {
        self.units.len() - self.treated()
    }
}

/// Builds one unit per recipe for the pair `cause -> effect`.
///
/// The confounder vocabulary holds the actions (other than the pair) that
/// occur before the first of cause and effect in some recipe and never after
/// it in any recipe. A unit's covariates record which vocabulary actions the
/// recipe contains, so they never depend on where the effect falls.
pub fn build_units(
    recipes: &[ProtoActionSequence],
    cause: &ProtoAction,
    effect: &ProtoAction,
) -> Result<UnitTable> {
    if cause == effect {
        return Err(Error::InvalidArgument(format!(
            "cause and effect are the same action {cause}"
        )));
    }
    let mut before = BTreeSet::new();
    let mut after = BTreeSet::new();
    let mut flags = Vec::with_capacity(recipes.len());
    for r in recipes {
        let pc = r.first_position(cause);
        let pe = r.first_position(effect);
        let treatment = match (pc, pe) {
            (Some(c), Some(e)) => c < e,
            (Some(_), None) => true,
            (None, _) => false,
        };
        let outcome = match pc {
            Some(c) => r.protos().skip(c + 1).any(|p| p == effect),
            None => pe.is_some(),
        };
        flags.push((treatment, outcome));
        if let Some(anchor) = [pc, pe].into_iter().flatten().min() {
            before.extend(r.protos().take(anchor));
            after.extend(r.protos().skip(anchor + 1));
        }
    }
    let vocabulary: Vec<ProtoAction> = before
        .difference(&after)
        .filter(|p| **p != cause && **p != effect)
        .map(|p| (*p).clone())
        .collect();

    let units = recipes
        .iter()
        .zip(flags)
        .map(|(r, (treatment, outcome))| CausalUnit {
            recipe_id: r.recipe_id.clone(),
            treatment,
            outcome,
            covariates: vocabulary.iter().map(|v| r.contains(v)).collect(),
        })
        .collect();

    Ok(UnitTable {
        cause: cause.clone(),
        effect: effect.clone(),
        vocabulary,
        units,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CausalEstimate {
    pub cause: ProtoAction,
    pub effect: ProtoAction,
    pub psi: f64,
    pub n_treated: usize,
    pub n_control: usize,
    pub n_matched: usize,
}

/// Units, propensity scores and matching for one (cause, effect) pair.
pub fn estimate_effect(
    recipes: &[ProtoActionSequence],
    cause: &ProtoAction,
    effect: &ProtoAction,
    cfg: &CausalConfig,
) -> Result<CausalEstimate> {
    let table = build_units(recipes, cause, effect)?;
    let (treated, control) = (table.treated(), table.control());
    if treated < cfg.min_support || control < cfg.min_support {
        return Err(Error::InsufficientSupport {
            treated,
            control,
            min: cfg.min_support,
        });
    }
    let scores = propensity_scores(&table.units, cfg)?;
    let m = matched_ate(&table.units, &scores, cfg)?;
    Ok(CausalEstimate {
        cause: cause.clone(),
        effect: effect.clone(),
        psi: m.psi,
        n_treated: m.n_treated,
        n_control: m.n_control,
        n_matched: m.n_matched,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// The other action was tested as a cause of the pivot.
    Cause,
    /// The other action was tested as an effect of the pivot.
    Effect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub other: ProtoAction,
    pub role: Role,
    pub psi: f64,
    pub n_treated: usize,
    pub n_control: usize,
    pub n_matched: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub other: ProtoAction,
    pub role: Role,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotConstraints {
    pub pivot: ProtoAction,
    pub preds: BTreeSet<ProtoAction>,
    pub succs: BTreeSet<ProtoAction>,
    pub estimates: Vec<EstimateRecord>,
    #[serde(default)]
    pub skipped: Vec<SkippedPair>,
    /// Actions that passed the threshold in both directions.
    #[serde(default)]
    pub conflicts: Vec<ProtoAction>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OrderConstraintSet {
    pub pivots: Vec<PivotConstraints>,
}

impl OrderConstraintSet {
    pub fn get(&self, pivot: &ProtoAction) -> Option<&PivotConstraints> {
        self.pivots.iter().find(|p| &p.pivot == pivot)
    }

    /// Constraint set from explicit (pivot, preds, succs) triples.
    pub fn from_triples(
        triples: impl IntoIterator<Item = (ProtoAction, Vec<ProtoAction>, Vec<ProtoAction>)>,
    ) -> Self {
        OrderConstraintSet {
            pivots: triples
                .into_iter()
                .map(|(pivot, preds, succs)| PivotConstraints {
                    pivot,
                    preds: preds.into_iter().collect(),
                    succs: succs.into_iter().collect(),
                    estimates: vec![],
                    skipped: vec![],
                    conflicts: vec![],
                })
                .collect(),
        }
    }
}

// Actions with some occurrence before (`before = true`) or after some occurrence of `pivot`.
fn neighbours(recipes: &[ProtoActionSequence], pivot: &ProtoAction, before: bool) -> BTreeSet<ProtoAction> {
    let mut out = BTreeSet::new();
    for r in recipes {
        let positions: Vec<usize> = r
            .protos()
            .enumerate()
            .filter(|(_, p)| *p == pivot)
            .map(|(i, _)| i)
            .collect();
        let (Some(&first), Some(&last)) = (positions.first(), positions.last()) else {
            continue;
        };
        for (i, p) in r.protos().enumerate() {
            if p == pivot {
                continue;
            }
            if (before && i < last) || (!before && i > first) {
                out.insert(p.clone());
            }
        }
    }
    out
}

/// Predecessor and successor sets for every insertion pivot.
pub fn order_constraints(
    pivots: &PivotActionSet,
    target_recipes: &[ProtoActionSequence],
    cfg: &CausalConfig,
) -> Result<OrderConstraintSet> {
    cfg.validate()?;
    if target_recipes.is_empty() {
        return Err(Error::EmptyInput("target dish recipes"));
    }
    let mut out = OrderConstraintSet::default();
    for pivot in pivots.insert.iter().map(|p| &p.action) {
        let mut entry = PivotConstraints {
            pivot: pivot.clone(),
            preds: BTreeSet::new(),
            succs: BTreeSet::new(),
            estimates: vec![],
            skipped: vec![],
            conflicts: vec![],
        };
        let mut strongest: std::collections::BTreeMap<ProtoAction, [Option<f64>; 2]> =
            Default::default();
        for (role, others) in [
            (Role::Cause, neighbours(target_recipes, pivot, true)),
            (Role::Effect, neighbours(target_recipes, pivot, false)),
        ] {
            for other in others {
                let result = match role {
                    Role::Cause => estimate_effect(target_recipes, &other, pivot, cfg),
                    Role::Effect => estimate_effect(target_recipes, pivot, &other, cfg),
                };
                match result {
                    Ok(est) => {
                        if est.psi > cfg.tau_c {
                            strongest.entry(other.clone()).or_default()[role as usize] = Some(est.psi);
                        }
                        entry.estimates.push(EstimateRecord {
                            other,
                            role,
                            psi: est.psi,
                            n_treated: est.n_treated,
                            n_control: est.n_control,
                            n_matched: est.n_matched,
                        });
                    }
                    Err(e @ (Error::InsufficientSupport { .. } | Error::NoMatches)) => {
                        log::debug!("skipping {other} ({role:?}) for pivot {pivot}: {e}");
                        entry.skipped.push(SkippedPair {
                            other,
                            role,
                            reason: e.to_string(),
                        });
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        for (other, [as_cause, as_effect]) in strongest {
            match (as_cause, as_effect) {
                (Some(_), None) => {
                    entry.preds.insert(other);
                }
                (None, Some(_)) => {
                    entry.succs.insert(other);
                }
                (Some(c), Some(e)) => {
                    log::warn!("{other} passes tau_c both before and after pivot {pivot}");
                    if c > e {
                        entry.preds.insert(other.clone());
                    } else if e > c {
                        entry.succs.insert(other.clone());
                    }
                    entry.conflicts.push(other);
                }
                (None, None) => {}
            }
        }
        out.pivots.push(entry);
    }
    Ok(out)
}
