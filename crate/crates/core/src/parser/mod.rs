//! Recipe text to ordered action instances and proto-actions.
//!
//! Each step is split into clauses; a clause containing at least one glossary
//! verb yields one action anchored on its leftmost verb. Ingredient and tool
//! classes come from glossary nouns in the clause, or, when dependency
//! annotations are supplied, from the verb's noun dependents only.

mod conllu;
mod segment;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::glossary::{ClassId, Glossary, WordKind};

pub use conllu::{ClauseParse, DepToken, DependencyAnnotations};
pub use segment::{clause_spans, segment_clauses, CLAUSE_SEPARATORS};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeText {
    pub recipe_id: String,
    #[serde(default)]
    pub dish: Option<String>,
    #[serde(default)]
    pub title: String,
    pub steps: Vec<String>,
}

impl RecipeText {
    pub fn new<I, S>(recipe_id: &str, dish: Option<&str>, steps: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        RecipeText {
            recipe_id: recipe_id.to_string(),
            dish: dish.map(str::to_string),
            title: dish.unwrap_or_default().to_string(),
            steps: steps.into_iter().map(Into::into).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.recipe_id.trim().is_empty() {
            return Err(Error::Schema("recipe_id must be non-empty".into()));
        }
        if self.steps.is_empty() {
            return Err(Error::Schema(format!("recipe {} has no steps", self.recipe_id)));
        }
        if self.steps.iter().any(|s| s.trim().is_empty()) {
            return Err(Error::Schema(format!("recipe {} has a blank step", self.recipe_id)));
        }
        Ok(())
    }

    /// Steps joined by newlines.
    pub fn text(&self) -> String {
        self.steps.join("\n")
    }
}

/// One extracted action, with its source phrase and position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionInstance {
    pub verb_surface: String,
    pub verb_class: ClassId,
    pub ingredient_classes: BTreeSet<ClassId>,
    pub tool_classes: BTreeSet<ClassId>,
    pub clause_text: String,
    pub step_index: usize,
    pub clause_index: usize,
    pub order_index: usize,
}

/// Canonical action triple: verb class, ingredient classes, tool classes.
///
/// Ordering and equality look at the class sets only, never at surface text.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProtoAction {
    pub verb: ClassId,
    #[serde(default)]
    pub ingredients: BTreeSet<ClassId>,
    #[serde(default)]
    pub tools: BTreeSet<ClassId>,
}

impl ProtoAction {
    pub fn new<I, T>(verb: &str, ingredients: I, tools: T) -> Self
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
        T: IntoIterator,
        T::Item: AsRef<str>,
    {
        ProtoAction {
            verb: ClassId::new(verb),
            ingredients: ingredients.into_iter().map(|s| ClassId::new(s.as_ref())).collect(),
            tools: tools.into_iter().map(|s| ClassId::new(s.as_ref())).collect(),
        }
    }

    /// Canonical JSON; equal actions produce identical strings.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("proto-action serializes")
    }

    /// Short stable identifier derived from the canonical JSON.
    pub fn action_id(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        format!("a{}", &hex::encode(digest)[..12])
    }
}

impl std::fmt::Display for ProtoAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |s: &BTreeSet<ClassId>| {
            s.iter().map(ClassId::as_str).collect::<Vec<_>>().join("+")
        };
        write!(f, "({}, {{{}}}, {{{}}})", self.verb, join(&self.ingredients), join(&self.tools))
    }
}

pub fn to_proto(instance: &ActionInstance) -> ProtoAction {
    ProtoAction {
        verb: instance.verb_class.clone(),
        ingredients: instance.ingredient_classes.clone(),
        tools: instance.tool_classes.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedAction {
    pub instance: ActionInstance,
    pub proto: ProtoAction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtoActionSequence {
    pub recipe_id: String,
    pub actions: Vec<ParsedAction>,
}

impl ProtoActionSequence {
    /// Builds a sequence straight from proto-actions; phrases are the action's display form.
    pub fn from_protos(recipe_id: &str, protos: impl IntoIterator<Item = ProtoAction>) -> Self {
        let actions = protos
            .into_iter()
            .enumerate()
            .map(|(i, proto)| ParsedAction {
                instance: ActionInstance {
                    verb_surface: proto.verb.to_string(),
                    verb_class: proto.verb.clone(),
                    ingredient_classes: proto.ingredients.clone(),
                    tool_classes: proto.tools.clone(),
                    clause_text: proto.to_string(),
                    step_index: 0,
                    clause_index: i,
                    order_index: i,
                },
                proto,
            })
            .collect();
        ProtoActionSequence {
            recipe_id: recipe_id.to_string(),
            actions,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn protos(&self) -> impl Iterator<Item = &ProtoAction> {
        self.actions.iter().map(|a| &a.proto)
    }

    pub fn contains(&self, action: &ProtoAction) -> bool {
        self.protos().any(|p| p == action)
    }

    /// Position (in the action list) of the first occurrence of `action`.
    pub fn first_position(&self, action: &ProtoAction) -> Option<usize> {
        self.protos().position(|p| p == action)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("sequence serializes")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// Attach the most recently mentioned ingredient class to actions that
    /// name no ingredient of their own.
    #[serde(default)]
    pub carry_forward_ingredients: bool,
}

/// Extracts one action per clause that contains a glossary verb.
pub fn extract_actions(
    recipe: &RecipeText,
    glossary: &Glossary,
    parses: Option<&BTreeMap<usize, ClauseParse>>,
    opts: ExtractOptions,
) -> Result<Vec<ActionInstance>> {
    let clauses: Vec<(usize, String)> = recipe
        .steps
        .iter()
        .enumerate()
        .flat_map(|(si, step)| segment_clauses(step).into_iter().map(move |c| (si, c)))
        .collect();

    if let Some(parses) = parses {
        let expected: Vec<usize> = (0..clauses.len()).collect();
        let found: Vec<usize> = parses.keys().copied().collect();
        if expected != found {
            return Err(Error::MalformedAnnotation(format!(
                "recipe {}: annotations cover clauses {found:?} but the recipe has {} clauses",
                recipe.recipe_id,
                clauses.len()
            )));
        }
    }

    let mut out = Vec::new();
    let mut last_ingredient: Option<ClassId> = None;
    for (clause_index, (step_index, clause)) in clauses.iter().enumerate() {
        let found = match parses {
            Some(p) => from_dependencies(&p[&clause_index], glossary),
            None => from_clause_text(clause, glossary),
        };
        let mentioned = glossary
            .scan(clause)
            .into_iter()
            .filter(|m| m.kind == WordKind::Ingredient)
            .last()
            .map(|m| m.class_id);
        if let Some((verb_surface, verb_class, mut ingredients, tools)) = found {
            if opts.carry_forward_ingredients && ingredients.is_empty() {
                if let Some(prev) = &last_ingredient {
                    ingredients.insert(prev.clone());
                }
            }
            out.push(ActionInstance {
                verb_surface,
                verb_class,
                ingredient_classes: ingredients,
                tool_classes: tools,
                clause_text: clause.clone(),
                step_index: *step_index,
                clause_index,
                order_index: out.len(),
            });
        }
        if mentioned.is_some() {
            last_ingredient = mentioned;
        }
    }
    Ok(out)
}

type Found = (String, ClassId, BTreeSet<ClassId>, BTreeSet<ClassId>);

fn from_clause_text(clause: &str, glossary: &Glossary) -> Option<Found> {
    let matches = glossary.scan(clause);
    let verb = matches.iter().find(|m| m.kind == WordKind::Verb)?;
    let of_kind = |kind| {
        matches
            .iter()
            .filter(|m| m.kind == kind)
            .map(|m| m.class_id.clone())
            .collect::<BTreeSet<_>>()
    };
    Some((
        verb.surface.clone(),
        verb.class_id.clone(),
        of_kind(WordKind::Ingredient),
        of_kind(WordKind::Tool),
    ))
}

fn from_dependencies(parse: &ClauseParse, glossary: &Glossary) -> Option<Found> {
    let (verb_token, verb) = parse.tokens.iter().find_map(|t| {
        glossary
            .scan(&t.form)
            .into_iter()
            .find(|m| m.kind == WordKind::Verb)
            .map(|m| (t, m))
    })?;
    let mut ingredients = BTreeSet::new();
    let mut tools = BTreeSet::new();
    for dep in parse.dependents_of(verb_token.id) {
        if dep.upos != "NOUN" && dep.upos != "PROPN" {
            continue;
        }
        for m in glossary.scan(&dep.form) {
            match m.kind {
                WordKind::Ingredient => {
                    ingredients.insert(m.class_id);
                }
                WordKind::Tool => {
                    tools.insert(m.class_id);
                }
                WordKind::Verb => {}
            }
        }
    }
    Some((verb.surface, verb.class_id, ingredients, tools))
}

pub fn parse_recipe(
    recipe: &RecipeText,
    glossary: &Glossary,
    parses: Option<&BTreeMap<usize, ClauseParse>>,
    opts: ExtractOptions,
) -> Result<ProtoActionSequence> {
    let actions = extract_actions(recipe, glossary, parses, opts)?
        .into_iter()
        .map(|instance| ParsedAction {
            proto: to_proto(&instance),
            instance,
        })
        .collect();
    Ok(ProtoActionSequence {
        recipe_id: recipe.recipe_id.clone(),
        actions,
    })
}

pub fn write_sequences(path: impl AsRef<Path>, seqs: &[ProtoActionSequence]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
    );
    for s in seqs {
        writeln!(f, "{}", s.to_json_line()).map_err(|e| Error::io(path, e))?;
    }
    f.flush().map_err(|e| Error::io(path, e))
}

pub fn read_sequences(path: impl AsRef<Path>) -> Result<Vec<ProtoActionSequence>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::json(format!("{}:{}", path.display(), i + 1), e))?,
        );
    }
    Ok(out)
}
