use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    None,
    /// Add one to numerator and denominator of every n-gram precision with n >= 2.
    #[default]
    AddOne,
}

fn ngram_counts<T: Hash + Eq>(tokens: &[T], n: usize) -> HashMap<&[T], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Sentence BLEU of `candidate` against one `reference`.
///
/// Uniform weights over n = 1..=`max_n`, clipped n-gram precision with a
/// denominator floored at one, and the usual brevity penalty.
pub fn bleu<T: Hash + Eq>(
    candidate: &[T],
    reference: &[T],
    max_n: usize,
    smoothing: Smoothing,
) -> Result<f64> {
    if candidate.is_empty() {
        return Err(Error::EmptyInput("BLEU candidate"));
    }
    if reference.is_empty() {
        return Err(Error::EmptyInput("BLEU reference"));
    }
    if max_n == 0 {
        return Err(Error::InvalidArgument("BLEU max order must be positive".into()));
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let cand = ngram_counts(candidate, n);
        let refc = ngram_counts(reference, n);
        let clipped: usize = cand
            .iter()
            .map(|(g, &c)| c.min(*refc.get(g).unwrap_or(&0)))
            .sum();
        let total = cand.values().sum::<usize>().max(1);
        let (num, den) = match smoothing {
            Smoothing::AddOne if n >= 2 => (clipped + 1, total + 1),
            _ => (clipped, total),
        };
        if num == 0 {
            return Ok(0.0);
        }
        log_sum += (num as f64 / den as f64).ln();
    }
    let (c, r) = (candidate.len() as f64, reference.len() as f64);
    let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    Ok(bp * (log_sum / max_n as f64).exp())
}
