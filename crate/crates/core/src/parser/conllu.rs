//! Pre-parsed dependency annotations in CoNLL-U.
//!
//! Each sentence is one clause and must carry two comment lines:
//!
//! ```text
//! # recipe_id = r001
//! # clause_index = 0
//! 1	切	切	VERB	_	_	0	root	_	_
//! 2	头	头	NOUN	_	_	1	obj	_	_
//! ```
//!
//! `clause_index` counts clauses across the whole recipe, in step order.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepToken {
    pub id: usize,
    pub form: String,
    pub upos: String,
    /// 0 for the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClauseParse {
    pub tokens: Vec<DepToken>,
}

impl ClauseParse {
    pub fn dependents_of(&self, head: usize) -> impl Iterator<Item = &DepToken> {
        self.tokens.iter().filter(move |t| t.head == head)
    }
}

/// Clause parses keyed by recipe id, then clause index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyAnnotations {
    recipes: BTreeMap<String, BTreeMap<usize, ClauseParse>>,
}

impl DependencyAnnotations {
    pub fn for_recipe(&self, recipe_id: &str) -> Option<&BTreeMap<usize, ClauseParse>> {
        self.recipes.get(recipe_id)
    }

    pub fn len(&self) -> usize {
        self.recipes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recipes.is_empty()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = DependencyAnnotations::default();
        let mut block: Vec<(usize, &str)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                if !block.is_empty() {
                    out.add_sentence(&block)?;
                    block.clear();
                }
            } else {
                block.push((i + 1, line));
            }
        }
        if !block.is_empty() {
            out.add_sentence(&block)?;
        }
        Ok(out)
    }

    fn add_sentence(&mut self, lines: &[(usize, &str)]) -> Result<()> {
        let first_line = lines[0].0;
        let mut recipe_id = None;
        let mut clause_index = None;
        let mut tokens = Vec::new();
        for &(lineno, line) in lines {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once('=') {
                    match key.trim() {
                        "recipe_id" => recipe_id = Some(value.trim().to_string()),
                        "clause_index" => {
                            clause_index = Some(value.trim().parse::<usize>().map_err(|_| {
                                Error::MalformedAnnotation(format!(
                                    "line {lineno}: bad clause_index {:?}",
                                    value.trim()
                                ))
                            })?)
                        }
                        _ => {}
                    }
                }
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 10 {
                return Err(Error::MalformedAnnotation(format!(
                    "line {lineno}: expected 10 tab-separated columns, found {}",
                    cols.len()
                )));
            }
            // Multiword ranges and empty nodes carry no syntactic head.
            if cols[0].contains('-') || cols[0].contains('.') {
                continue;
            }
            let int = |s: &str, what: &str| {
                s.parse::<usize>().map_err(|_| {
                    Error::MalformedAnnotation(format!("line {lineno}: bad {what} {s:?}"))
                })
            };
            tokens.push(DepToken {
                id: int(cols[0], "ID")?,
                form: cols[1].to_string(),
                upos: cols[3].to_string(),
                head: int(cols[6], "HEAD")?,
                deprel: cols[7].to_string(),
            });
        }
        let recipe_id = recipe_id.ok_or_else(|| {
            Error::MalformedAnnotation(format!("sentence at line {first_line}: no recipe_id"))
        })?;
        let clause_index = clause_index.ok_or_else(|| {
            Error::MalformedAnnotation(format!("sentence at line {first_line}: no clause_index"))
        })?;
        for (pos, t) in tokens.iter().enumerate() {
            if t.id != pos + 1 {
                return Err(Error::MalformedAnnotation(format!(
                    "sentence at line {first_line}: token ids must run 1..n"
                )));
            }
            if t.head > tokens.len() || t.head == t.id {
                return Err(Error::MalformedAnnotation(format!(
                    "sentence at line {first_line}: token {} has invalid head {}",
                    t.id, t.head
                )));
            }
        }
        let clauses = self.recipes.entry(recipe_id.clone()).or_default();
        if clauses.insert(clause_index, ClauseParse { tokens }).is_some() {
            return Err(Error::MalformedAnnotation(format!(
                "recipe {recipe_id}: clause {clause_index} annotated twice"
            )));
        }
        Ok(())
    }
}
