//! Corpus analysis and evaluation toolkit for counterfactual recipe rewriting.
//!
//! The crate is organized as a pipeline:
//!
//! - [`glossary`]: word-class glossary, static embeddings, K-means authoring aid.
//! - [`parser`]: recipe text to ordered proto-actions.
//! - [`miner`]: per-dish action frequencies, pivot categorization, annotation round-trip.
//! - [`causal`]: propensity-score-matched effects and order constraints for pivots.
//! - [`metrics`]: ingredient coverage, preservation scores, hard/soft action F1, BWS.
//! - [`pipeline`]: corpus ingestion, splitting, artifact persistence, orchestration.

pub mod causal;
pub mod error;
pub mod glossary;
pub mod metrics;
pub mod miner;
pub mod parser;
pub mod pipeline;

pub use error::{Error, Result};
pub use glossary::{ClassId, EmbeddingTable, Glossary, WordClass, WordKind};
pub use parser::{ActionInstance, ProtoAction, ProtoActionSequence, RecipeText};

/// Version string recorded in artifact provenance.
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Derives an independent seed for a named sub-task from one master seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
