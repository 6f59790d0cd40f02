//! Prompt construction and model access for corpus correction runs.
//!
//! [`render`] turns a template, language, optional exemplars, and an
//! input sentence into a [`PromptBundle`] — the full, provider-neutral
//! chat request. [`correct`] executes a bundle against a [`ChatClient`]
//! behind a content-addressed [`Cache`] and a [`RetryPolicy`];
//! [`correct_corpus`] drives a whole corpus with bounded parallelism.
//! Model output is cleaned by [`normalize_response`] and never edited
//! beyond whitespace and wrapping quotes — label prefixes such as
//! "Corrected:" are deliberately kept so prompt-compliance failures
//! stay visible downstream.

mod batch;
mod cache;
mod client;
mod exemplar;
mod template;

pub use batch::{correct, correct_corpus, BatchOptions, BatchOutcome, ModelResponse};
pub use cache::{Cache, CacheRecord};
pub use client::{
    ChatClient, Dialect, HttpChatClient, ProviderPreset, RawCompletion, RetryPolicy,
};
pub use exemplar::{select_exemplars, ExemplarSet, ExemplarSource, Provenance};
pub use template::{
    normalize_response, render, Message, PromptBundle, PromptStyle, PromptTemplate, Role,
    DEFAULT_TEMPERATURE,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("template system text is empty")]
    EmptyTemplate,
    #[error(
        "few-shot template {name:?} must end with an exemplar-introduction clause \
         (a final line mentioning the examples, e.g. \"Below are 10 random sentences \
         for your reference.\")"
    )]
    MissingExemplarClause { name: String },
    #[error("template {template:?} is few-shot and requires exemplars")]
    ExemplarsRequired { template: String },
    #[error("template {template:?} is zero-shot and does not accept exemplars")]
    ExemplarsNotAllowed { template: String },
    #[error("exemplar set is empty")]
    EmptyExemplars,
    #[error("train split has {train} pairs, fewer than the requested k={k}")]
    TrainTooSmall { train: usize, k: usize },
    #[error("exemplars must come from a train split, got {split}")]
    NotTrainSplit { split: String },
    #[error("curated exemplar file {path}: expected {expected} pairs, found {found}")]
    CuratedCount {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("curated exemplar file {path}: {message}")]
    CuratedFile { path: String, message: String },
    #[error("model returned an empty or whitespace-only response")]
    EmptyResponse { raw: String },
    #[error("provider {provider}: credential env var {env_var} is not set")]
    MissingCredential { provider: String, env_var: String },
    #[error("provider {provider}: HTTP {status}: {message}")]
    Http {
        provider: String,
        status: u16,
        message: String,
    },
    #[error("provider {provider}: network error: {message}")]
    Network { provider: String, message: String },
    #[error("provider {provider}: malformed response: {message}")]
    Protocol { provider: String, message: String },
    #[error("provider {provider}: retries exhausted after {attempts} attempts; last error: {last}")]
    RetriesExhausted {
        provider: String,
        attempts: u32,
        last: String,
    },
    #[error("retry policy must allow at least one attempt")]
    InvalidRetryPolicy,
    #[error("parallelism must be at least 1")]
    InvalidParallelism,
    #[error("cache {path}: {message}")]
    Cache { path: String, message: String },
    #[error(
        "{failed} of {total} corrections failed, above the configured failure threshold; \
         partial results retained"
    )]
    TooManyFailures {
        failed: usize,
        total: usize,
        partial: Box<BatchOutcome>,
    },
}

impl PromptError {
    /// Transient failures worth retrying: rate limits, server errors,
    /// and network-level faults.
    pub fn is_retryable(&self) -> bool {
        match self {
            PromptError::Http { status, .. } => *status == 429 || *status >= 500,
            PromptError::Network { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T, E = PromptError> = std::result::Result<T, E>;
