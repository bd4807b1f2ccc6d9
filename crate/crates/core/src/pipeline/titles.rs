use serde::{Deserialize, Serialize};

use crate::parser::RecipeText;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TitleRule {
    Exact,
    Suffix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TitleMatch {
    pub recipe_id: String,
    pub dish: String,
    pub rule: TitleRule,
}

/// Maps unlabeled recipe titles onto known dish names (experimental).
///
/// A title equal to a dish name maps to it; otherwise the longest dish name
/// that ends the title wins ("家常红烧肉" -> "红烧肉"). Recipes that already
/// carry a dish, or match nothing, are left out.
pub fn map_titles<'a>(
    recipes: impl IntoIterator<Item = &'a RecipeText>,
    dishes: &[String],
) -> Vec<TitleMatch> {
    let mut by_len: Vec<&String> = dishes.iter().filter(|d| !d.is_empty()).collect();
    by_len.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    recipes
        .into_iter()
        .filter(|r| r.dish.is_none())
        .filter_map(|r| {
            let title = r.title.trim();
            let (dish, rule) = if let Some(d) = by_len.iter().find(|d| d.as_str() == title) {
                (d, TitleRule::Exact)
            } else {
                (by_len.iter().find(|d| title.ends_with(d.as_str()))?, TitleRule::Suffix)
            };
            Some(TitleMatch {
                recipe_id: r.recipe_id.clone(),
                dish: dish.to_string(),
                rule,
            })
        })
        .collect()
}
