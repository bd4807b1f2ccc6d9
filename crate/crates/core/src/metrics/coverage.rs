use serde::{Deserialize, Serialize};

use super::{ChangeKind, DishPair, IngredientRef};
use crate::error::{Error, Result};
use crate::glossary::{Glossary, WordKind};
use crate::parser::RecipeText;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    /// Share of generated recipes mentioning the added ingredient.
    pub coi_add: f64,
    /// Share of Replace-pair generated recipes still mentioning the removed
    /// ingredient; absent when there are no Replace instances.
    pub coi_replace: Option<f64>,
    pub n_instances: usize,
    pub n_replace: usize,
}

/// Whether `text` mentions the ingredient by name, or by any surface form of
/// its glossary class when `expand` is set.
pub fn ingredient_present(text: &str, ing: &IngredientRef, glossary: &Glossary, expand: bool) -> bool {
    if text.contains(ing.name.as_str()) {
        return true;
    }
    expand
        && glossary
            .class(WordKind::Ingredient, &ing.class_id)
            .is_some_and(|c| c.surface_forms.iter().any(|f| text.contains(f.as_str())))
}

/// Ingredient coverage over (pair, generated recipe) items.
pub fn coverage_of_ingredients(
    items: &[(&DishPair, &RecipeText)],
    glossary: &Glossary,
    expand: bool,
) -> Result<Coverage> {
    if items.is_empty() {
        return Err(Error::EmptyInput("evaluation instances"));
    }
    let mut added = 0usize;
    let mut replaced = 0usize;
    let mut n_replace = 0usize;
    for (pair, recipe) in items {
        let text = recipe.text();
        if ingredient_present(&text, &pair.added_ingredient, glossary, expand) {
            added += 1;
        }
        if pair.change_kind == ChangeKind::Replace {
            n_replace += 1;
            let removed = pair.removed_ingredient.as_ref().ok_or_else(|| {
                Error::Schema(format!("Replace pair {} lacks removed_ingredient", pair.pair_id))
            })?;
            if ingredient_present(&text, removed, glossary, expand) {
                replaced += 1;
            }
        }
    }
    Ok(Coverage {
        coi_add: added as f64 / items.len() as f64,
        coi_replace: (n_replace > 0).then(|| replaced as f64 / n_replace as f64),
        n_instances: items.len(),
        n_replace,
    })
}
