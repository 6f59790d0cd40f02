//! Script-aware tokenization for metric computation: extended grapheme
//! clusters, word tokenization with punctuation detachment, n-gram
//! counting, and a byte-level BPE engine for fertility profiling.

mod bpe;
mod fertility;

pub use bpe::{bpe_encode, bytes_to_token, token_to_bytes, TokenizerKind, TokenizerSpec};
pub use fertility::{fertility, FertilityReport, Side};

use std::collections::HashMap;

use thiserror::Error;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};
use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::Language;

#[derive(Debug, Error)]
pub enum TokenizeError {
    #[error("n-gram order must be at least 1")]
    ZeroOrderNgram,
    #[error("token bytes {bytes:?} missing from vocab (inconsistent tokenizer spec)")]
    BytesNotInVocab { bytes: Vec<u8> },
    #[error("merge rule {index} concatenation {bytes:?} missing from vocab")]
    MergeNotInVocab { index: usize, bytes: Vec<u8> },
    #[error("{path}: {message}")]
    SpecFile { path: String, message: String },
    #[error("tokenizer {name:?} is not byte-BPE")]
    NotByteBpe { name: String },
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("zero words in corpus; fertility undefined")]
    ZeroWords,
}

pub type Result<T, E = TokenizeError> = std::result::Result<T, E>;

/// How a token sequence was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenOrigin {
    Word,
    Subword,
    Grapheme,
}

/// An ordered list of nonempty tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub origin: TokenOrigin,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>, origin: TokenOrigin) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty()));
        Self { tokens, origin }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// True when every codepoint of `token` is punctuation (Unicode category
/// P; danda and double danda are category Po and covered).
pub fn is_punctuation_token(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_punctuation_char)
}

fn is_punctuation_char(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
        || c == '\u{0964}'
        || c == '\u{0965}'
}

/// Split text into extended grapheme clusters (UAX #29).
pub fn graphemes(text: &str) -> TokenSequence {
    let tokens = text.graphemes(true).map(str::to_string).collect();
    TokenSequence::new(tokens, TokenOrigin::Grapheme)
}

/// Word tokenization: split on whitespace, then detach leading and
/// trailing punctuation graphemes as separate tokens. Internal
/// punctuation is kept, and a grapheme cluster is never split.
///
/// The rules are language-independent; the parameter records which
/// language the text belongs to.
pub fn word_tokenize(text: &str, _language: &Language) -> TokenSequence {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        let clusters: Vec<&str> = chunk.graphemes(true).collect();
        let mut start = 0;
        let mut end = clusters.len();
        while start < end && is_punctuation_token(clusters[start]) {
            start += 1;
        }
        while end > start && is_punctuation_token(clusters[end - 1]) {
            end -= 1;
        }
        for cluster in &clusters[..start] {
            tokens.push((*cluster).to_string());
        }
        if start < end {
            tokens.push(clusters[start..end].concat());
        }
        for cluster in &clusters[end..] {
            tokens.push((*cluster).to_string());
        }
    }
    TokenSequence::new(tokens, TokenOrigin::Word)
}

/// All contiguous n-token windows with multiplicity. Empty when the
/// sequence is shorter than n.
pub fn ngrams(tokens: &TokenSequence, n: usize) -> Result<HashMap<Vec<String>, usize>> {
    if n == 0 {
        return Err(TokenizeError::ZeroOrderNgram);
    }
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.tokens.windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    Ok(counts)
}
