use std::collections::BTreeSet;

use crate::glossary::{cosine, EmbeddingTable};

use super::text::tokenize;

/// Similarity value plus the tokens that had no vector (scored as zero vectors).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scored {
    pub score: f64,
    pub missing: BTreeSet<String>,
}

/// Greedy-matching F1 over static token embeddings.
///
/// Every candidate token takes its best cosine against the reference tokens
/// and vice versa; the two directional means are combined as an F1. Negative
/// best cosines count as zero so the score stays in [0, 1]. This is a
/// static-vector stand-in for contextual BERTScore and is reported as `embed_sim`.
pub fn embed_sim_score<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    emb: &EmbeddingTable,
) -> Scored {
    let mut missing = BTreeSet::new();
    let mut vectors = |tokens: &[S]| -> Vec<Vec<f64>> {
        tokens
            .iter()
            .map(|t| {
                let t = t.as_ref();
                if emb.get(t).is_none() {
                    missing.insert(t.to_string());
                }
                emb.get_or_zero(t)
            })
            .collect()
    };
    let cand = vectors(candidate);
    let refs = vectors(reference);
    if cand.is_empty() || refs.is_empty() {
        return Scored { score: 0.0, missing };
    }
    let best_mean = |from: &[Vec<f64>], to: &[Vec<f64>]| {
        from.iter()
            .map(|a| to.iter().map(|b| cosine(a, b)).fold(0.0f64, f64::max))
            .sum::<f64>()
            / from.len() as f64
    };
    let precision = best_mean(&cand, &refs);
    let recall = best_mean(&refs, &cand);
    let score = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Scored {
        score: score.clamp(0.0, 1.0),
        missing,
    }
}

/// Cosine between the averaged token vectors of two phrases.
pub fn phrase_similarity(a: &str, b: &str, emb: &EmbeddingTable) -> Scored {
    let ta = tokenize(a);
    let tb = tokenize(b);
    let ma = emb.mean_vector(&ta);
    let mb = emb.mean_vector(&tb);
    Scored {
        score: cosine(&ma.vector, &mb.vector),
        missing: ma.missing.into_iter().chain(mb.missing).collect(),
    }
}
