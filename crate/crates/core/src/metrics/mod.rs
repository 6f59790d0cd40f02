//! Correction-quality metrics, all pure functions over token sequences
//! and embedding matrices.
//!
//! * [`gleu_sentence`] / [`gleu_corpus`] — source-penalized n-gram score
//!   (1–4 grams, single reference).
//! * [`extract_edits`] / [`f_beta`] — span-edit extraction by minimal-cost
//!   alignment and edit-level F-beta.
//! * [`bertscore`] — greedy embedding matching with optional idf weights,
//!   plus the [`EmbeddingProvider`] implementations feeding it.
//! * [`identity_compliance`] — did the system leave already-correct
//!   inputs unchanged?

mod bertscore;
mod compliance;
mod edits;
mod embed;
mod fscore;
mod gleu;

pub use bertscore::{bertscore, BertScoreResult, IdfWeights};
pub use compliance::{identity_compliance, ComplianceResult};
pub use edits::{extract_edits, EditSet, EditSpan};
pub use embed::{EmbeddingProvider, HashEmbedder, HttpEmbedder};
pub use fscore::{f_beta, f_beta_from_counts, FScoreResult};
pub use gleu::{gleu_corpus, gleu_sentence, GleuResult, GLEU_VARIANT};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("reference token sequence is empty")]
    EmptyReference,
    #[error("metric input list is empty")]
    EmptyInput,
    #[error("edit sets derive from different source lengths: {hyp} vs {gold}")]
    MismatchedSources { hyp: usize, gold: usize },
    #[error("beta must be a positive number, got {0}")]
    InvalidBeta(f64),
    #[error("invalid edit set: {0}")]
    InvalidEditSet(String),
    #[error("edit set built for a {expected}-token source, got {found} tokens")]
    WrongSourceLength { expected: usize, found: usize },
    #[error("{side} embedding matrix is empty")]
    EmptyEmbeddings { side: &'static str },
    #[error("embedding dimensions differ: hypothesis {hyp} vs reference {reference}")]
    DimensionMismatch { hyp: usize, reference: usize },
    #[error("zero-norm embedding row {row} on the {side} side")]
    ZeroNormRow { side: &'static str, row: usize },
    #[error("idf weight count {got} does not match {side} row count {rows}")]
    WeightLength {
        side: &'static str,
        got: usize,
        rows: usize,
    },
    #[error("idf weights must be finite, non-negative, and sum to a positive value")]
    InvalidWeights,
    #[error("no corrected output for pair {id:?}")]
    MissingOutput { id: String },
    #[error("pair {id:?} is not an identity pair (source differs from reference)")]
    NotIdentityPair { id: String },
    #[error("embedding provider {provider}: {message}")]
    EmbeddingProvider { provider: String, message: String },
}

pub type Result<T, E = MetricError> = std::result::Result<T, E>;
