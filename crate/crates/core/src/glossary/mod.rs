//! Curated word-class glossary.
//!
//! A glossary groups the many surface forms of verbs, ingredients and tools
//! into classes (`{加入, 放入, 加}` all mean *add*). Classes are authored data:
//! they are loaded from JSON, never mined at runtime. [`cluster_terms`] is an
//! authoring aid for proposing classes from word vectors.

mod cluster;
mod embeddings;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cluster::{cluster_terms, initial_centroids, ClusterOptions};
pub use embeddings::{cosine, EmbeddingTable, MeanVector};

/// Opaque identifier of a word class.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(String);

impl ClassId {
    pub fn new(id: impl Into<String>) -> Self {
        ClassId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ClassId {
    fn from(s: &str) -> Self {
        ClassId(s.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordKind {
    Verb,
    Ingredient,
    Tool,
}

impl WordKind {
    pub const ALL: [WordKind; 3] = [WordKind::Verb, WordKind::Ingredient, WordKind::Tool];
}

impl fmt::Display for WordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordKind::Verb => "verb",
            WordKind::Ingredient => "ingredient",
            WordKind::Tool => "tool",
        })
    }
}

/// One class of synonymous surface forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordClass {
    pub class_id: ClassId,
    pub kind: WordKind,
    pub canonical: String,
    pub surface_forms: BTreeSet<String>,
}

impl WordClass {
    pub fn new<I, S>(class_id: &str, kind: WordKind, canonical: &str, forms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        WordClass {
            class_id: ClassId::new(class_id),
            kind,
            canonical: canonical.to_string(),
            surface_forms: forms.into_iter().map(Into::into).collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.class_id.as_str().trim().is_empty() {
            return Err(Error::Schema("class_id must be non-empty".into()));
        }
        if self.surface_forms.is_empty() {
            return Err(Error::Schema(format!(
                "class {} has no surface forms",
                self.class_id
            )));
        }
        if let Some(bad) = self.surface_forms.iter().find(|f| f.trim().is_empty()) {
            return Err(Error::Schema(format!(
                "class {} has a blank surface form {bad:?}",
                self.class_id
            )));
        }
        if !self.surface_forms.contains(&self.canonical) {
            return Err(Error::Schema(format!(
                "class {}: canonical form {:?} is not among its surface forms",
                self.class_id, self.canonical
            )));
        }
        Ok(())
    }
}

/// A glossary hit inside a piece of text. Offsets are byte offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlossaryMatch {
    pub kind: WordKind,
    pub class_id: ClassId,
    pub surface: String,
    pub start: usize,
    pub end: usize,
}

/// Immutable set of word classes with a (kind, surface form) index.
#[derive(Clone, Debug, Default)]
pub struct Glossary {
    classes: Vec<WordClass>,
    index: HashMap<(WordKind, String), usize>,
    by_id: HashMap<(WordKind, ClassId), usize>,
    max_form_chars: usize,
}

impl PartialEq for Glossary {
    fn eq(&self, other: &Self) -> bool {
        self.classes == other.classes
    }
}

impl Glossary {
    pub fn from_classes(classes: Vec<WordClass>) -> Result<Self> {
        let mut index: HashMap<(WordKind, String), usize> = HashMap::new();
        let mut by_id = HashMap::new();
        let mut max_form_chars = 0;
        for (i, class) in classes.iter().enumerate() {
            class.validate()?;
            if by_id
                .insert((class.kind, class.class_id.clone()), i)
                .is_some()
            {
                return Err(Error::Schema(format!(
                    "class_id {} appears twice for kind {}",
                    class.class_id, class.kind
                )));
            }
            for form in &class.surface_forms {
                if let Some(&prev) = index.get(&(class.kind, form.clone())) {
                    return Err(Error::DuplicateSurfaceForm {
                        kind: class.kind,
                        form: form.clone(),
                        first: classes[prev].class_id.to_string(),
                        second: class.class_id.to_string(),
                    });
                }
                index.insert((class.kind, form.clone()), i);
                max_form_chars = max_form_chars.max(form.chars().count());
            }
        }
        Ok(Glossary {
            classes,
            index,
            by_id,
            max_form_chars,
        })
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let classes: Vec<WordClass> =
            serde_json::from_str(json).map_err(|e| Error::json("glossary", e))?;
        Self::from_classes(classes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let classes: Vec<WordClass> = serde_json::from_str(&text)
            .map_err(|e| Error::json(path.display().to_string(), e))?;
        Self::from_classes(classes)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.classes).expect("glossary serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    pub fn classes(&self) -> &[WordClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Number of indexed (kind, surface form) entries.
    pub fn indexed_forms(&self) -> usize {
        self.index.len()
    }

    /// The class of `kind` that lists `token` verbatim, if any.
    pub fn lookup(&self, kind: WordKind, token: &str) -> Option<&ClassId> {
        self.index
            .get(&(kind, token.to_string()))
            .map(|&i| &self.classes[i].class_id)
    }

    pub fn class(&self, kind: WordKind, id: &ClassId) -> Option<&WordClass> {
        self.by_id
            .get(&(kind, id.clone()))
            .map(|&i| &self.classes[i])
    }

    pub fn contains_class(&self, kind: WordKind, id: &ClassId) -> bool {
        self.by_id.contains_key(&(kind, id.clone()))
    }

    /// Leftmost-longest scan of `text` for glossary forms of any kind.
    ///
    /// At each position the longest form of any kind wins; on equal length the
    /// kind order is verb, ingredient, tool. Forms that begin or end with an
    /// ASCII alphanumeric character only match on ASCII word boundaries.
    pub fn scan(&self, text: &str) -> Vec<GlossaryMatch> {
        let bounds: Vec<usize> = text
            .char_indices()
            .map(|(b, _)| b)
            .chain(std::iter::once(text.len()))
            .collect();
        let n_chars = bounds.len() - 1;
        let mut out = Vec::new();
        let mut i = 0;
        while i < n_chars {
            let longest = self.max_form_chars.min(n_chars - i);
            let hit = (1..=longest).rev().find_map(|len| {
                let (start, end) = (bounds[i], bounds[i + len]);
                let candidate = &text[start..end];
                if !on_word_boundary(text, start, end) {
                    return None;
                }
                WordKind::ALL.iter().find_map(|&kind| {
                    self.lookup(kind, candidate).map(|id| GlossaryMatch {
                        kind,
                        class_id: id.clone(),
                        surface: candidate.to_string(),
                        start,
                        end,
                    })
                })
                .map(|m| (m, len))
            });
            match hit {
                Some((m, len)) => {
                    out.push(m);
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}

fn on_word_boundary(text: &str, start: usize, end: usize) -> bool {
    let word = |c: char| c.is_ascii_alphanumeric();
    let span = &text[start..end];
    let first = span.chars().next();
    let last = span.chars().next_back();
    if first.is_some_and(word) && text[..start].chars().next_back().is_some_and(word) {
        return false;
    }
    if last.is_some_and(word) && text[end..].chars().next().is_some_and(word) {
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add_class() -> WordClass {
        WordClass::new("add", WordKind::Verb, "加入", ["加入", "放入", "加"])
    }

    #[test]
    fn single_verb_class_indexes_three_forms() {
        let g = Glossary::from_classes(vec![add_class()]).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.indexed_forms(), 3);
        assert_eq!(g.lookup(WordKind::Verb, "放入"), Some(&ClassId::new("add")));
    }

    #[test]
    fn empty_glossary_misses_everything() {
        let g = Glossary::from_json_str("[]").unwrap();
        assert!(g.is_empty());
        assert_eq!(g.lookup(WordKind::Verb, "加"), None);
        assert!(g.scan("加入鱿鱼").is_empty());
    }

    #[test]
    fn duplicate_form_reports_both_classes() {
        let a = WordClass::new("add", WordKind::Verb, "下", ["下", "加"]);
        let b = WordClass::new("lower", WordKind::Verb, "下", ["下", "放下"]);
        match Glossary::from_classes(vec![a, b]) {
            Err(Error::DuplicateSurfaceForm { form, first, second, .. }) => {
                assert_eq!(form, "下");
                assert_eq!(first, "add");
                assert_eq!(second, "lower");
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn same_form_in_different_kinds_is_allowed() {
        let v = WordClass::new("add", WordKind::Verb, "加入", ["加入"]);
        let i = WordClass::new("odd", WordKind::Ingredient, "加入", ["加入"]);
        assert!(Glossary::from_classes(vec![v, i]).is_ok());
    }

    #[test]
    fn lookup_respects_kind() {
        let g = Glossary::from_classes(vec![add_class()]).unwrap();
        assert_eq!(g.lookup(WordKind::Ingredient, "加入"), None);
        assert_eq!(g.lookup(WordKind::Verb, "unknown-token"), None);
    }

    #[test]
    fn schema_violations_are_rejected() {
        let missing_canonical = r#"[{"class_id":"add","kind":"verb","canonical":"add","surface_forms":["加"]}]"#;
        assert!(matches!(
            Glossary::from_json_str(missing_canonical),
            Err(Error::Schema(_))
        ));
        let bad_kind = r#"[{"class_id":"add","kind":"adverb","canonical":"加","surface_forms":["加"]}]"#;
        assert!(matches!(Glossary::from_json_str(bad_kind), Err(Error::Json { .. })));
        let no_forms = r#"[{"class_id":"add","kind":"verb","canonical":"加","surface_forms":[]}]"#;
        assert!(Glossary::from_json_str(no_forms).is_err());
    }

    #[test]
    fn scan_prefers_longest_form() {
        let g = Glossary::from_classes(vec![
            WordClass::new("add", WordKind::Verb, "加", ["加", "加入"]),
            WordClass::new("heat", WordKind::Verb, "加热", ["加热"]),
            WordClass::new("oil", WordKind::Ingredient, "油", ["油"]),
        ])
        .unwrap();
        let hits = g.scan("加热油后加入");
        let ids: Vec<_> = hits.iter().map(|m| m.class_id.as_str()).collect();
        assert_eq!(ids, ["heat", "oil", "add"]);
        assert_eq!(hits[2].surface, "加入");
    }

    #[test]
    fn scan_respects_ascii_word_boundaries() {
        let g = Glossary::from_classes(vec![
            WordClass::new("cut", WordKind::Verb, "cut", ["cut"]),
            WordClass::new("head", WordKind::Ingredient, "head", ["head"]),
        ])
        .unwrap();
        assert!(g.scan("cutting the header").is_empty());
        let hits = g.scan("cut off the head");
        assert_eq!(hits.len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let g = Glossary::from_classes(vec![
            add_class(),
            WordClass::new("pot", WordKind::Tool, "锅", ["锅", "炒锅"]),
        ])
        .unwrap();
        let back = Glossary::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(g, back);
    }
}
