//! Core library for corpus-driven grammatical error correction (GEC)
//! evaluation of Indic languages.
//!
//! The crate is organized as four layers that the `gec` CLI composes:
//!
//! * [`corpus`] — parallel source/reference corpora: loading, validation,
//!   per-split statistics, and identity-pair subsets.
//! * [`tokenize`] — word and grapheme segmentation, byte-level BPE
//!   encoding against loadable tokenizer specs, and fertility
//!   (tokens-per-word) profiling.
//! * [`metrics`] — GEC quality scores: a source-penalized n-gram score,
//!   span-edit F-beta, embedding-based greedy-matching F1, and
//!   identity-compliance analysis.
//! * [`prompting`] — prompt assembly for chat-completion endpoints,
//!   response normalization, an on-disk response cache, and a retrying
//!   HTTP client with bounded-parallel batch orchestration.
//!
//! Everything here is deterministic given fixed inputs and seeds; the
//! only nondeterminism enters through live model endpoints, which are
//! isolated behind the [`prompting::ChatClient`] trait.

pub mod corpus;
pub mod metrics;
pub mod prompting;
pub mod tokenize;
