use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PivotCategorization, PivotSelection};
use crate::error::{Error, Result};
use crate::parser::{ProtoAction, ProtoActionSequence};

/// Fewer than three distinct occurrences; phrases were drawn with replacement.
pub const FLAG_DUPLICATED: &str = "duplicated_samples";
/// No occurrence among target-dish recipes; phrases come from base-dish recipes.
pub const FLAG_FROM_BASE: &str = "from_base_dish";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    DoesNotOccur,
    RarelyOccur,
    SometimesOccur,
    AlwaysOccur,
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "does_not_occur" => Ok(Label::DoesNotOccur),
            "rarely_occur" => Ok(Label::RarelyOccur),
            "sometimes_occur" => Ok(Label::SometimesOccur),
            "always_occur" => Ok(Label::AlwaysOccur),
            other => Err(Error::Schema(format!("unknown annotation label {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteCounts {
    pub does_not_occur: usize,
    pub rarely_occur: usize,
    pub sometimes_occur: usize,
    pub always_occur: usize,
}

impl VoteCounts {
    pub fn tally(votes: &[Label]) -> Self {
        let mut c = VoteCounts::default();
        for v in votes {
            match v {
                Label::DoesNotOccur => c.does_not_occur += 1,
                Label::RarelyOccur => c.rarely_occur += 1,
                Label::SometimesOccur => c.sometimes_occur += 1,
                Label::AlwaysOccur => c.always_occur += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.does_not_occur + self.rarely_occur + self.sometimes_occur + self.always_occur
    }
}

/// One queued action with its three sample phrases and flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueueEntry {
    pub action_id: String,
    pub action: ProtoAction,
    pub phrases: [String; 3],
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationRecord {
    pub action: ProtoAction,
    pub sample_phrases: Vec<String>,
    pub votes: Vec<Label>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct Vote {
    pub action_id: String,
    pub annotator_id: String,
    pub label: String,
}

fn occurrences<'a>(seqs: &'a [ProtoActionSequence], action: &ProtoAction) -> Vec<&'a str> {
    seqs.iter()
        .flat_map(|s| s.actions.iter())
        .filter(|a| &a.proto == action)
        .map(|a| a.instance.clause_text.as_str())
        .collect()
}

/// Samples three phrases per queued action, preferring target-dish recipes.
pub fn build_annotation_queue(
    cat: &PivotCategorization,
    target: &[ProtoActionSequence],
    base: &[ProtoActionSequence],
    seed: u64,
) -> Result<Vec<QueueEntry>> {
    cat.manual
        .iter()
        .map(|action| {
            let action_id = action.action_id();
            let mut flags = Vec::new();
            let mut pool = occurrences(target, action);
            if pool.is_empty() {
                pool = occurrences(base, action);
                flags.push(FLAG_FROM_BASE.to_string());
            }
            if pool.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "queued action {action} ({action_id}) never occurs in the pair's recipes"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, &action_id));
            let picks: Vec<usize> = if pool.len() >= 3 {
                let mut idx = rand::seq::index::sample(&mut rng, pool.len(), 3).into_vec();
                idx.sort_unstable();
                idx
            } else {
                flags.push(FLAG_DUPLICATED.to_string());
                (0..3).map(|_| rng.gen_range(0..pool.len())).collect()
            };
            let phrases = [0, 1, 2].map(|k| pool[picks[k]].to_string());
            Ok(QueueEntry {
                action_id,
                action: action.clone(),
                phrases,
                flags,
            })
        })
        .collect()
}

/// Companion JSON next to a queue CSV: `queue.csv` -> `queue.actions.json`.
pub fn queue_companion_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("actions.json")
}

/// Writes the annotation queue CSV plus its action-id companion JSON.
pub fn export_annotation_queue(
    cat: &PivotCategorization,
    target: &[ProtoActionSequence],
    base: &[ProtoActionSequence],
    out: &Path,
    seed: u64,
) -> Result<usize> {
    let entries = build_annotation_queue(cat, target, base, seed)?;
    write_queue(&entries, out)?;
    Ok(entries.len())
}

pub(crate) fn write_queue(entries: &[QueueEntry], out: &Path) -> Result<()> {
    let ctx = out.display().to_string();
    let mut w = csv::Writer::from_path(out).map_err(|e| Error::csv(&ctx, e))?;
    w.write_record(["action_id", "phrase_1", "phrase_2", "phrase_3", "flag"])
        .map_err(|e| Error::csv(&ctx, e))?;
    for e in entries {
        let flag = e.flags.join(";");
        w.write_record([
            e.action_id.as_str(),
            &e.phrases[0],
            &e.phrases[1],
            &e.phrases[2],
            &flag,
        ])
        .map_err(|e| Error::csv(&ctx, e))?;
    }
    w.flush().map_err(|e| Error::io(out, e))?;

    let companion: BTreeMap<&str, &ProtoAction> =
        entries.iter().map(|e| (e.action_id.as_str(), &e.action)).collect();
    let json = serde_json::to_string_pretty(&companion).expect("companion serializes");
    let path = queue_companion_path(out);
    std::fs::write(&path, json).map_err(|e| Error::io(path, e))
}

#[derive(Deserialize)]
struct QueueRow {
    action_id: String,
    phrase_1: String,
    phrase_2: String,
    phrase_3: String,
    #[allow(dead_code)]
    flag: String,
}

pub fn read_annotation_results(path: &Path) -> Result<Vec<Vote>> {
    let ctx = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(&ctx, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(&ctx, e)))
        .collect()
}

/// Joins an exported queue with collected votes into annotation records.
pub fn load_annotation_records(queue_csv: &Path, results_csv: &Path) -> Result<Vec<AnnotationRecord>> {
    let companion_path = queue_companion_path(queue_csv);
    let text = std::fs::read_to_string(&companion_path).map_err(|e| Error::io(&companion_path, e))?;
    let actions: BTreeMap<String, ProtoAction> = serde_json::from_str(&text)
        .map_err(|e| Error::json(companion_path.display().to_string(), e))?;

    let ctx = queue_csv.display().to_string();
    let mut reader = csv::Reader::from_path(queue_csv).map_err(|e| Error::csv(&ctx, e))?;
    let mut phrases: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for row in reader.deserialize::<QueueRow>() {
        let row = row.map_err(|e| Error::csv(&ctx, e))?;
        phrases.insert(row.action_id, vec![row.phrase_1, row.phrase_2, row.phrase_3]);
    }

    let mut votes: BTreeMap<String, Vec<Label>> = BTreeMap::new();
    for v in read_annotation_results(results_csv)? {
        if !actions.contains_key(&v.action_id) {
            return Err(Error::UnexpectedAnnotation(v.action_id));
        }
        votes.entry(v.action_id).or_default().push(v.label.parse()?);
    }
    Ok(votes
        .into_iter()
        .map(|(id, votes)| AnnotationRecord {
            action: actions[&id].clone(),
            sample_phrases: phrases.remove(&id).unwrap_or_default(),
            votes,
        })
        .collect())
}

/// Settles queued actions by strict majority and merges them with the automatic sets.
///
/// A queued action joins the removals when more than half of its votes say it
/// does not occur, the insertions when more than half say it always occurs,
/// and is dropped otherwise. Queued actions nobody voted on are dropped.
pub fn import_annotations(
    cat: &PivotCategorization,
    records: &[AnnotationRecord],
) -> Result<PivotSelection> {
    let mut out = PivotSelection::automatic(cat);
    out.annotations_applied = true;
    let mut seen = BTreeSet::new();
    for r in records {
        let id = r.action.action_id();
        if !cat.manual.contains(&r.action) || !seen.insert(r.action.clone()) {
            return Err(Error::UnexpectedAnnotation(id));
        }
        if r.votes.len() < 3 {
            return Err(Error::TooFewVotes {
                action_id: id,
                votes: r.votes.len(),
            });
        }
        let counts = VoteCounts::tally(&r.votes);
        let n = counts.total();
        if 2 * counts.does_not_occur > n {
            out.remove.insert(r.action.clone());
        } else if 2 * counts.always_occur > n {
            out.insert.insert(r.action.clone());
        }
        out.vote_counts.insert(id, counts);
    }
    Ok(out)
}
