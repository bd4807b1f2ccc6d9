use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parser::RecipeText;

/// A rejected input line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub recipes: usize,
    pub dishes: usize,
    pub unlabeled: usize,
    pub mean_recipes_per_dish: f64,
    pub mean_steps: f64,
    pub mean_chars: f64,
}

/// Recipes keyed by id, with the dish grouping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub recipes: BTreeMap<String, RecipeText>,
    /// Recipe ids per dish, in id order.
    pub by_dish: BTreeMap<String, Vec<String>>,
}

impl Corpus {
    pub fn from_recipes(recipes: impl IntoIterator<Item = RecipeText>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for r in recipes {
            r.validate()?;
            if corpus.recipes.contains_key(&r.recipe_id) {
                return Err(Error::Schema(format!("duplicate recipe_id {:?}", r.recipe_id)));
            }
            corpus.recipes.insert(r.recipe_id.clone(), r);
        }
        corpus.rebuild_index();
        Ok(corpus)
    }

    fn rebuild_index(&mut self) {
        self.by_dish.clear();
        for r in self.recipes.values() {
            if let Some(d) = &r.dish {
                self.by_dish.entry(d.clone()).or_default().push(r.recipe_id.clone());
            }
        }
    }

    pub fn len(&self) -> usize {
        self.recipes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recipes.is_empty()
    }

    pub fn dish_recipes(&self, dish: &str) -> impl Iterator<Item = &RecipeText> {
        self.by_dish
            .get(dish)
            .into_iter()
            .flatten()
            .map(|id| &self.recipes[id])
    }

    /// The sub-corpus of recipes for which `keep` holds.
    pub fn filter(&self, keep: impl Fn(&RecipeText) -> bool) -> Corpus {
        let mut out = Corpus {
            recipes: self
                .recipes
                .iter()
                .filter(|(_, r)| keep(r))
                .map(|(k, r)| (k.clone(), r.clone()))
                .collect(),
            by_dish: BTreeMap::new(),
        };
        out.rebuild_index();
        out
    }

    pub fn stats(&self) -> CorpusStats {
        let n = self.recipes.len();
        let mean = |total: usize, count: usize| {
            if count == 0 {
                0.0
            } else {
                total as f64 / count as f64
            }
        };
        let labeled: usize = self.by_dish.values().map(Vec::len).sum();
        CorpusStats {
            recipes: n,
            dishes: self.by_dish.len(),
            unlabeled: n - labeled,
            mean_recipes_per_dish: mean(labeled, self.by_dish.len()),
            mean_steps: mean(self.recipes.values().map(|r| r.steps.len()).sum(), n),
            mean_chars: mean(
                self.recipes
                    .values()
                    .map(|r| r.steps.iter().map(|s| s.chars().count()).sum::<usize>())
                    .sum(),
                n,
            ),
        }
    }

    /// Writes the recipes as JSONL in id order.
    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = String::new();
        for r in self.recipes.values() {
            text.push_str(&serde_json::to_string(r).expect("recipe serializes"));
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Reads a recipe JSONL file.
///
/// In lenient mode malformed lines and repeated recipe ids are skipped and
/// returned as issues; in strict mode the first such line is an error.
pub fn load_corpus(path: impl AsRef<Path>, strict: bool) -> Result<(Corpus, Vec<LoadIssue>)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(std::io::BufReader::new(file), &path.display().to_string(), strict)
}

pub fn read_corpus<R: BufRead>(
    reader: R,
    source: &str,
    strict: bool,
) -> Result<(Corpus, Vec<LoadIssue>)> {
    let mut corpus = Corpus::default();
    let mut issues = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RecipeText>(&line)
            .map_err(|e| e.to_string())
            .and_then(|r| r.validate().map(|_| r).map_err(|e| e.to_string()))
            .and_then(|r| {
                if corpus.recipes.contains_key(&r.recipe_id) {
                    Err(format!("duplicate recipe_id {:?}", r.recipe_id))
                } else {
                    Ok(r)
                }
            });
        match parsed {
            Ok(r) => {
                corpus.recipes.insert(r.recipe_id.clone(), r);
            }
            Err(message) if strict => {
                return Err(Error::Schema(format!("{source}:{}: {message}", i + 1)));
            }
            Err(message) => {
                log::warn!("{source}:{}: {message}", i + 1);
                issues.push(LoadIssue {
                    line: i + 1,
                    message,
                });
            }
        }
    }
    corpus.rebuild_index();
    Ok((corpus, issues))
}
