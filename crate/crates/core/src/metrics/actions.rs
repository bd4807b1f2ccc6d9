use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::similarity::phrase_similarity;
use super::MetricConfig;
use crate::causal::OrderConstraintSet;
use crate::glossary::EmbeddingTable;
use crate::miner::PivotActionSet;
use crate::parser::{ProtoAction, ProtoActionSequence};

pub const FLAG_EMPTY_CHANGES: &str = "empty_changes";
pub const FLAG_EMPTY_PIVOTS: &str = "empty_pivots";
pub const FLAG_EMPTY_INSERT_CHANGES: &str = "empty_insert_changes";
pub const FLAG_EMPTY_INSERT_PIVOTS: &str = "empty_insert_pivots";
pub const FLAG_EMPTY_REMOVE_CHANGES: &str = "empty_remove_changes";
pub const FLAG_EMPTY_REMOVE_PIVOTS: &str = "empty_remove_pivots";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Insert,
    Remove,
}

/// One changed action occurrence. `position` indexes the generated sequence
/// for insertions and the base sequence for removals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Change {
    pub action: ProtoAction,
    pub position: usize,
    pub phrase: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    pub inserted: Vec<Change>,
    pub removed: Vec<Change>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.inserted.is_empty() && self.removed.is_empty()
    }

    pub fn inserted_actions(&self) -> BTreeSet<&ProtoAction> {
        self.inserted.iter().map(|c| &c.action).collect()
    }

    pub fn removed_actions(&self) -> BTreeSet<&ProtoAction> {
        self.removed.iter().map(|c| &c.action).collect()
    }
}

// Occurrences of each action beyond the first `keep(action)` ones.
fn surplus<'a>(
    seq: &'a ProtoActionSequence,
    keep: &HashMap<&ProtoAction, usize>,
) -> Vec<Change> {
    let mut seen: HashMap<&'a ProtoAction, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, a) in seq.actions.iter().enumerate() {
        let n = seen.entry(&a.proto).or_insert(0);
        *n += 1;
        if *n > keep.get(&a.proto).copied().unwrap_or(0) {
            out.push(Change {
                action: a.proto.clone(),
                position: i,
                phrase: a.instance.clause_text.clone(),
            });
        }
    }
    out
}

fn counts(seq: &ProtoActionSequence) -> HashMap<&ProtoAction, usize> {
    let mut m = HashMap::new();
    for p in seq.protos() {
        *m.entry(p).or_insert(0) += 1;
    }
    m
}

/// Multiset difference between two action sequences.
///
/// For an action occurring k times in the base and m times in the generated
/// recipe, the first min(k, m) occurrences on each side are unchanged; the
/// remaining generated occurrences are insertions and the remaining base
/// occurrences are removals.
pub fn diff_actions(base: &ProtoActionSequence, generated: &ProtoActionSequence) -> ChangeSet {
    ChangeSet {
        inserted: surplus(generated, &counts(base)),
        removed: surplus(base, &counts(generated)),
    }
}

/// Whether an occurrence at `position` of the generated sequence respects the
/// recorded predecessors and successors of `action`.
///
/// Each predecessor present in the sequence needs an occurrence before
/// `position`, each successor present needs one after it. Absent
/// constraint actions, and actions without recorded constraints, pass.
pub fn check_order(
    action: &ProtoAction,
    position: usize,
    generated: &ProtoActionSequence,
    constraints: &OrderConstraintSet,
) -> bool {
    let Some(c) = constraints.get(action) else {
        return true;
    };
    let protos: Vec<&ProtoAction> = generated.protos().collect();
    let (before, after) = if position < protos.len() {
        (&protos[..position], &protos[position + 1..])
    } else {
        (&protos[..], &protos[protos.len()..])
    };
    let ok = |set: &BTreeSet<ProtoAction>, side: &[&ProtoAction]| {
        set.iter()
            .all(|w| !protos.contains(&w) || side.contains(&w))
    };
    ok(&c.preds, before) && ok(&c.succs, after)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Scores for a matched weight against `n_changes` changes and `n_pivots` pivots.
    /// Zero denominators give zero.
    pub fn new(matched: f64, n_changes: usize, n_pivots: usize) -> Self {
        let ratio = |d: usize| if d == 0 { 0.0 } else { matched / d as f64 };
        Self::from_pr(ratio(n_changes), ratio(n_pivots))
    }

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }
}

/// Precision, recall and F1 overall and per side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PrfSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_insert: f64,
    pub recall_insert: f64,
    /// F1 restricted to insertions and insertion pivots.
    pub f1_insert: f64,
    pub precision_remove: f64,
    pub recall_remove: f64,
    /// F1 restricted to removals and removal pivots.
    pub f1_remove: f64,
}

impl PrfSummary {
    pub fn from_parts(all: Prf, insert: Prf, remove: Prf) -> Self {
        PrfSummary {
            precision: all.precision,
            recall: all.recall,
            f1: all.f1,
            precision_insert: insert.precision,
            recall_insert: insert.recall,
            f1_insert: insert.f1,
            precision_remove: remove.precision,
            recall_remove: remove.recall,
            f1_remove: remove.f1,
        }
    }

    /// Averages precisions and recalls; each F1 is recomputed from the averaged pair.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a PrfSummary>) -> Self {
        let items: Vec<&PrfSummary> = items.into_iter().collect();
        if items.is_empty() {
            return Self::default();
        }
        let n = items.len() as f64;
        let avg = |f: fn(&PrfSummary) -> f64| items.iter().map(|s| f(s)).sum::<f64>() / n;
        Self::from_parts(
            Prf::from_pr(avg(|s| s.precision), avg(|s| s.recall)),
            Prf::from_pr(avg(|s| s.precision_insert), avg(|s| s.recall_insert)),
            Prf::from_pr(avg(|s| s.precision_remove), avg(|s| s.recall_remove)),
        )
    }
}

/// Action-level agreement between a change set and a pivot set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActionScores {
    #[serde(flatten)]
    pub prf: PrfSummary,
    pub matched_insert: f64,
    pub matched_remove: f64,
    pub n_insert_changes: usize,
    pub n_remove_changes: usize,
    pub n_insert_pivots: usize,
    pub n_remove_pivots: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ActionScores {
    fn new(ins: (f64, usize, usize), rem: (f64, usize, usize)) -> Self {
        let mut flags = Vec::new();
        for (empty, flag) in [
            (ins.1 + rem.1 == 0, FLAG_EMPTY_CHANGES),
            (ins.2 + rem.2 == 0, FLAG_EMPTY_PIVOTS),
            (ins.1 == 0, FLAG_EMPTY_INSERT_CHANGES),
            (ins.2 == 0, FLAG_EMPTY_INSERT_PIVOTS),
            (rem.1 == 0, FLAG_EMPTY_REMOVE_CHANGES),
            (rem.2 == 0, FLAG_EMPTY_REMOVE_PIVOTS),
        ] {
            if empty {
                flags.push(flag.to_string());
            }
        }
        ActionScores {
            prf: PrfSummary::from_parts(
                Prf::new(ins.0 + rem.0, ins.1 + rem.1, ins.2 + rem.2),
                Prf::new(ins.0, ins.1, ins.2),
                Prf::new(rem.0, rem.1, rem.2),
            ),
            matched_insert: ins.0,
            matched_remove: rem.0,
            n_insert_changes: ins.1,
            n_remove_changes: rem.1,
            n_insert_pivots: ins.2,
            n_remove_pivots: rem.2,
            flags,
        }
    }

    pub fn matched(&self) -> f64 {
        self.matched_insert + self.matched_remove
    }
}

/// How many insertion-pivot hits were checked for order and how many passed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderTally {
    pub checked: usize,
    pub passed: usize,
}

impl OrderTally {
    pub fn accuracy(&self) -> Option<f64> {
        (self.checked > 0).then(|| self.passed as f64 / self.checked as f64)
    }
}

impl std::ops::AddAssign for OrderTally {
    fn add_assign(&mut self, rhs: Self) {
        self.checked += rhs.checked;
        self.passed += rhs.passed;
    }
}

// A changed action with all its positions, phrased by its first occurrence.
struct Distinct<'a> {
    action: &'a ProtoAction,
    positions: Vec<usize>,
    phrase: &'a str,
}

fn distinct(changes: &[Change]) -> Vec<Distinct<'_>> {
    let mut out: Vec<Distinct> = Vec::new();
    for c in changes {
        match out.iter_mut().find(|d| d.action == &c.action) {
            Some(d) => d.positions.push(c.position),
            None => out.push(Distinct {
                action: &c.action,
                positions: vec![c.position],
                phrase: &c.phrase,
            }),
        }
    }
    out
}

fn order_ok(
    pivot: &ProtoAction,
    positions: &[usize],
    generated: &ProtoActionSequence,
    constraints: &OrderConstraintSet,
) -> bool {
    positions
        .iter()
        .any(|&p| check_order(pivot, p, generated, constraints))
}

// Exact matches per side: (insert matches, remove matches, order tally).
fn exact_matches<'a>(
    ins: &[Distinct<'a>],
    rem: &[Distinct<'a>],
    pivots: &PivotActionSet,
    generated: &ProtoActionSequence,
    constraints: &OrderConstraintSet,
) -> (Vec<&'a ProtoAction>, Vec<&'a ProtoAction>, OrderTally) {
    let mut tally = OrderTally::default();
    let mut hit_ins = Vec::new();
    for d in ins.iter().filter(|d| pivots.is_insert(d.action)) {
        tally.checked += 1;
        if order_ok(d.action, &d.positions, generated, constraints) {
            tally.passed += 1;
            hit_ins.push(d.action);
        }
    }
    let hit_rem = rem
        .iter()
        .filter(|d| pivots.is_remove(d.action))
        .map(|d| d.action)
        .collect();
    (hit_ins, hit_rem, tally)
}

/// Hard agreement: a distinct changed action counts when it equals a pivot of
/// the same side, and insertions must also pass [`check_order`] at one of
/// their positions. The tally counts insertion-pivot hits before the order filter.
pub fn hard_prf(
    changes: &ChangeSet,
    pivots: &PivotActionSet,
    generated: &ProtoActionSequence,
    constraints: &OrderConstraintSet,
) -> (ActionScores, OrderTally) {
    let ins = distinct(&changes.inserted);
    let rem = distinct(&changes.removed);
    let (hi, hr, tally) = exact_matches(&ins, &rem, pivots, generated, constraints);
    let scores = ActionScores::new(
        (hi.len() as f64, ins.len(), pivots.insert.len()),
        (hr.len() as f64, rem.len(), pivots.remove.len()),
    );
    (scores, tally)
}

/// Greedy one-to-one matching on a similarity matrix.
///
/// Pairs with similarity above `threshold` that `allowed` accepts are taken
/// in order of descending similarity (ties by row, then column) whenever
/// both their row and column are still free.
pub fn greedy_matching(
    sim: &[Vec<f64>],
    threshold: f64,
    allowed: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let mut cands: Vec<(usize, usize)> = Vec::new();
    for (i, row) in sim.iter().enumerate() {
        for (j, &s) in row.iter().enumerate() {
            if s > threshold && allowed(i, j) {
                cands.push((i, j));
            }
        }
    }
    cands.sort_by(|a, b| sim[b.0][b.1].total_cmp(&sim[a.0][a.1]).then(a.cmp(b)));
    let n_cols = sim.iter().map(Vec::len).max().unwrap_or(0);
    let mut row_used = vec![false; sim.len()];
    let mut col_used = vec![false; n_cols];
    let mut out = Vec::new();
    for (i, j) in cands {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            out.push((i, j));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftMatch {
    pub side: Side,
    pub change: ProtoAction,
    pub pivot: ProtoAction,
    pub weight: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftMatching {
    pub matches: Vec<SoftMatch>,
    pub scores: ActionScores,
    /// Phrase tokens without an embedding vector.
    pub missing_tokens: BTreeSet<String>,
}

/// Soft agreement: the hard intersection at weight one, extended by greedy
/// one-to-one matches between remaining changes and pivots of the same side
/// whose phrase similarity exceeds `tau_s`, weighted by that similarity.
/// Soft insertions must pass the order check under the matched pivot's constraints.
pub fn soft_match(
    changes: &ChangeSet,
    pivots: &PivotActionSet,
    generated: &ProtoActionSequence,
    constraints: &OrderConstraintSet,
    emb: &EmbeddingTable,
    cfg: &MetricConfig,
) -> SoftMatching {
    let ins = distinct(&changes.inserted);
    let rem = distinct(&changes.removed);
    let (hi, hr, _) = exact_matches(&ins, &rem, pivots, generated, constraints);

    let mut matches: Vec<SoftMatch> = hi
        .iter()
        .map(|a| (Side::Insert, *a))
        .chain(hr.iter().map(|a| (Side::Remove, *a)))
        .map(|(side, a)| SoftMatch {
            side,
            change: a.clone(),
            pivot: a.clone(),
            weight: 1.0,
            exact: true,
        })
        .collect();

    let rows: Vec<(Side, &Distinct)> = ins
        .iter()
        .filter(|d| !hi.contains(&d.action))
        .map(|d| (Side::Insert, d))
        .chain(rem.iter().filter(|d| !hr.contains(&d.action)).map(|d| (Side::Remove, d)))
        .collect();
    let cols: Vec<(Side, &ProtoAction, &str)> = pivots
        .insert
        .iter()
        .filter(|p| !hi.contains(&&p.action))
        .map(|p| (Side::Insert, &p.action, p.phrase.as_str()))
        .chain(
            pivots
                .remove
                .iter()
                .filter(|p| !hr.contains(&&p.action))
                .map(|p| (Side::Remove, &p.action, p.phrase.as_str())),
        )
        .collect();

    let mut missing_tokens = BTreeSet::new();
    let sim: Vec<Vec<f64>> = rows
        .iter()
        .map(|(rs, d)| {
            cols.iter()
                .map(|(cs, _, phrase)| {
                    if rs != cs {
                        return 0.0;
                    }
                    let s = phrase_similarity(d.phrase, phrase, emb);
                    missing_tokens.extend(s.missing);
                    s.score
                })
                .collect()
        })
        .collect();
    let allowed = |i: usize, j: usize| {
        let (rs, d) = rows[i];
        let (cs, pivot, _) = cols[j];
        rs == cs && (rs == Side::Remove || order_ok(pivot, &d.positions, generated, constraints))
    };
    for (i, j) in greedy_matching(&sim, cfg.tau_s, allowed) {
        matches.push(SoftMatch {
            side: rows[i].0,
            change: rows[i].1.action.clone(),
            pivot: cols[j].1.clone(),
            weight: sim[i][j],
            exact: false,
        });
    }

    let weight = |side: Side| -> f64 {
        matches.iter().filter(|m| m.side == side).map(|m| m.weight).sum()
    };
    let scores = ActionScores::new(
        (weight(Side::Insert), ins.len(), pivots.insert.len()),
        (weight(Side::Remove), rem.len(), pivots.remove.len()),
    );
    SoftMatching {
        matches,
        scores,
        missing_tokens,
    }
}
