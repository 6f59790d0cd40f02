//! Tokenizer fertility: subword tokens emitted per word over a corpus.
//!
//! The word denominator is the number of whitespace-delimited chunks
//! after punctuation detachment, with punctuation-only tokens excluded.
//! Reports state this definition so the numbers stay interpretable.

use serde::{Deserialize, Serialize};

use super::{
    bpe_encode, is_punctuation_token, word_tokenize, Result, TokenizeError, TokenizerKind,
    TokenizerSpec,
};
use crate::corpus::{Corpus, Language};

/// Which side of the parallel corpus to profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Source,
    Reference,
}

/// Token-to-word ratio of one tokenizer over one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FertilityReport {
    pub language: Language,
    pub tokenizer_name: String,
    pub n_words: usize,
    pub n_subword_tokens: usize,
    pub fertility: f64,
}

pub fn fertility(spec: &TokenizerSpec, corpus: &Corpus, side: Side) -> Result<FertilityReport> {
    if corpus.is_empty() {
        return Err(TokenizeError::EmptyCorpus);
    }
    let mut n_words = 0usize;
    let mut n_subword_tokens = 0usize;
    for pair in corpus.iter() {
        let text = match side {
            Side::Source => &pair.source,
            Side::Reference => &pair.reference,
        };
        let words = word_tokenize(text, &corpus.language);
        let word_count = words
            .tokens
            .iter()
            .filter(|t| !is_punctuation_token(t))
            .count();
        n_words += word_count;
        n_subword_tokens += match spec.kind {
            TokenizerKind::ByteBpe => bpe_encode(spec, text)?.len(),
            // identity tokenizer: one subword token per word
            TokenizerKind::WordPerToken => word_count,
        };
    }
    if n_words == 0 {
        return Err(TokenizeError::ZeroWords);
    }
    Ok(FertilityReport {
        language: corpus.language.clone(),
        tokenizer_name: spec.name.clone(),
        n_words,
        n_subword_tokens,
        fertility: n_subword_tokens as f64 / n_words as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, SentencePair, Split};
    use std::collections::{BTreeMap, HashSet};

    fn corpus_of(sentences: &[&str]) -> Corpus {
        let language = Language::builtin("hi").unwrap();
        let pairs = sentences
            .iter()
            .enumerate()
            .map(|(i, s)| SentencePair {
                id: format!("test-{}", i + 1),
                source: (*s).to_string(),
                reference: (*s).to_string(),
                language: language.clone(),
            })
            .collect();
        Corpus::new(language, Split::Test, pairs).unwrap()
    }

    /// The bundled six-merge toy spec used in the hand-counted example.
    pub(crate) fn toy_spec() -> TokenizerSpec {
        let vocab: BTreeMap<Vec<u8>, u64> =
            ["a", "b", "c", " ", ".", "ab", "aba", " c", " cab", " ab", "cab"]
                .iter()
                .enumerate()
                .map(|(i, s)| (s.as_bytes().to_vec(), i as u64))
                .collect();
        let merges = [
            ("a", "b"),
            ("ab", "a"),
            (" ", "c"),
            (" c", "ab"),
            (" ", "ab"),
            ("c", "ab"),
        ]
        .iter()
        .map(|(a, b)| (a.as_bytes().to_vec(), b.as_bytes().to_vec()))
        .collect();
        TokenizerSpec::new("toy-bpe", TokenizerKind::ByteBpe, vocab, merges, HashSet::new())
            .unwrap()
    }

    #[test]
    fn word_per_token_fertility_is_exactly_one() {
        let spec = TokenizerSpec::word_per_token("identity");
        let corpus = corpus_of(&["कुछ शब्द यहाँ।", "और एक वाक्य"]);
        let report = fertility(&spec, &corpus, Side::Source).unwrap();
        assert_eq!(report.fertility, 1.0);
        assert_eq!(report.n_words, report.n_subword_tokens);
        assert_eq!(report.n_words, 6);
    }

    #[test]
    fn toy_spec_matches_hand_count() {
        // hand-simulated before implementation: 12 subword tokens over
        // 9 words across these five sentences
        let corpus = corpus_of(&["aba cab", "ab ab", "b aba", "cab cab", "abc."]);
        let report = fertility(&toy_spec(), &corpus, Side::Source).unwrap();
        assert_eq!(report.n_subword_tokens, 12);
        assert_eq!(report.n_words, 9);
        assert!((report.fertility - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reference_side_is_selectable() {
        let language = Language::builtin("hi").unwrap();
        let corpus = Corpus::new(
            language.clone(),
            Split::Test,
            vec![SentencePair {
                id: "test-1".into(),
                source: "ab".into(),
                reference: "ab ab ab".into(),
                language,
            }],
        )
        .unwrap();
        let spec = toy_spec();
        let src = fertility(&spec, &corpus, Side::Source).unwrap();
        let re = fertility(&spec, &corpus, Side::Reference).unwrap();
        assert_eq!(src.n_words, 1);
        assert_eq!(re.n_words, 3);
    }

    #[test]
    fn zero_words_rejected() {
        // ASCII punctuation only, so the toy vocab can encode it
        let corpus = corpus_of(&["...", ". ."]);
        let err = fertility(&toy_spec(), &corpus, Side::Source).unwrap_err();
        assert!(matches!(err, TokenizeError::ZeroWords));

        // danda-only text with the identity tokenizer
        let spec = TokenizerSpec::word_per_token("identity");
        let corpus = corpus_of(&["।।"]);
        let err = fertility(&spec, &corpus, Side::Source).unwrap_err();
        assert!(matches!(err, TokenizeError::ZeroWords));
    }

    #[test]
    fn empty_corpus_rejected() {
        let language = Language::builtin("hi").unwrap();
        let corpus = Corpus::new(language, Split::Test, vec![]).unwrap();
        let err = fertility(&toy_spec(), &corpus, Side::Source).unwrap_err();
        assert!(matches!(err, TokenizeError::EmptyCorpus));
    }
}
