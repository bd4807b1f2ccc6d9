use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One Best-Worst judgement over a set of compared systems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rating {
    pub item_id: String,
    pub rater_id: String,
    pub best_model: String,
    pub worst_model: String,
}

/// Per model: 100 * (times chosen best - times chosen worst) / number of ratings.
pub fn bws_score(ratings: &[Rating]) -> Result<BTreeMap<String, f64>> {
    if ratings.is_empty() {
        return Err(Error::EmptyInput("BWS ratings"));
    }
    let mut net: BTreeMap<String, i64> = BTreeMap::new();
    for r in ratings {
        if r.best_model == r.worst_model {
            return Err(Error::Schema(format!(
                "rating of item {} by {} names {} as both best and worst",
                r.item_id, r.rater_id, r.best_model
            )));
        }
        *net.entry(r.best_model.clone()).or_insert(0) += 1;
        *net.entry(r.worst_model.clone()).or_insert(0) -= 1;
    }
    let n = ratings.len() as f64;
    Ok(net.into_iter().map(|(m, v)| (m, 100.0 * v as f64 / n)).collect())
}

/// Reads `item_id,rater_id,best_model,worst_model` rows.
pub fn read_ratings(path: impl AsRef<Path>) -> Result<Vec<Rating>> {
    let path = path.as_ref();
    let ctx = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(&ctx, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(&ctx, e)))
        .collect()
}
