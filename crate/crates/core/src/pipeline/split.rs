use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corpus::Corpus;
use crate::error::{Error, Result};
use crate::metrics::DishPair;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub dish_pairs: Vec<DishPair>,
    pub eval_sample_size: usize,
    pub seed: u64,
}

/// A base recipe chosen for rewriting under one dish pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvalSkeleton {
    pub pair_id: String,
    pub base_recipe_id: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub finetune: Corpus,
    pub eval: Vec<EvalSkeleton>,
    /// Pairs whose base dish had fewer recipes than the sample size.
    pub undersampled: Vec<String>,
}

/// Checks pair ids and dish roles against the corpus.
pub fn validate_pairs(corpus: &Corpus, pairs: &[DishPair]) -> Result<()> {
    let mut ids = BTreeSet::new();
    let mut bases = BTreeMap::new();
    let mut targets = BTreeMap::new();
    for p in pairs {
        p.validate()?;
        if !ids.insert(p.pair_id.as_str()) {
            return Err(Error::Schema(format!("duplicate pair_id {:?}", p.pair_id)));
        }
        for dish in [&p.base_dish, &p.target_dish] {
            if !corpus.by_dish.contains_key(dish) {
                return Err(Error::UnknownDish(dish.clone()));
            }
        }
        bases.insert(p.base_dish.as_str(), p.pair_id.as_str());
        targets.insert(p.target_dish.as_str(), p.pair_id.as_str());
    }
    if let Some((dish, pair)) = bases.iter().find(|(d, _)| targets.contains_key(*d)) {
        return Err(Error::Schema(format!(
            "dish {dish:?} is a base dish in pair {pair} and a target dish in pair {}",
            targets[dish]
        )));
    }
    Ok(())
}

/// Warnings for pairs whose dishes have fewer than `min_recipes` recipes.
pub fn pair_support_warnings(corpus: &Corpus, pairs: &[DishPair], min_recipes: usize) -> Vec<String> {
    let mut out = Vec::new();
    for p in pairs {
        for dish in [&p.base_dish, &p.target_dish] {
            let n = corpus.by_dish.get(dish).map_or(0, Vec::len);
            if n < min_recipes {
                out.push(format!(
                    "pair {}: dish {dish:?} has {n} recipes, fewer than {min_recipes}",
                    p.pair_id
                ));
            }
        }
    }
    out
}

/// Splits off every recipe of every paired dish and samples the evaluation
/// base recipes.
///
/// The finetune corpus keeps only recipes whose dish is in no pair (unlabeled
/// recipes stay). Each pair samples up to `eval_sample_size` base-dish recipes
/// with a seed derived from `SplitSpec::seed` and the pair id.
pub fn split(corpus: &Corpus, spec: &SplitSpec) -> Result<Split> {
    validate_pairs(corpus, &spec.dish_pairs)?;
    let paired: BTreeSet<&str> = spec
        .dish_pairs
        .iter()
        .flat_map(|p| [p.base_dish.as_str(), p.target_dish.as_str()])
        .collect();
    let finetune = corpus.filter(|r| r.dish.as_deref().is_none_or(|d| !paired.contains(d)));

    let mut eval = Vec::new();
    let mut undersampled = Vec::new();
    for p in &spec.dish_pairs {
        let pool = &corpus.by_dish[&p.base_dish];
        let chosen: Vec<usize> = if pool.len() <= spec.eval_sample_size {
            if pool.len() < spec.eval_sample_size {
                log::warn!(
                    "pair {}: base dish has {} recipes, sampling all of them",
                    p.pair_id,
                    pool.len()
                );
                undersampled.push(p.pair_id.clone());
            }
            (0..pool.len()).collect()
        } else {
            let seed = crate::derive_seed(spec.seed, &format!("split/{}", p.pair_id));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, pool.len(), spec.eval_sample_size).into_vec();
            idx.sort_unstable();
            idx
        };
        eval.extend(chosen.into_iter().map(|i| EvalSkeleton {
            pair_id: p.pair_id.clone(),
            base_recipe_id: pool[i].clone(),
        }));
    }
    Ok(Split {
        finetune,
        eval,
        undersampled,
    })
}
