//! Byte-level BPE encoding against a loadable merge/vocab spec.
//!
//! Tokens returned by [`bpe_encode`] carry raw bytes mapped one char per
//! byte (U+0000..U+00FF), so a token string is always valid Unicode even
//! when a merge straddles a codepoint boundary. [`token_to_bytes`]
//! inverts the mapping; concatenating the byte forms of all tokens
//! reproduces the UTF-8 input exactly.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{Result, TokenOrigin, TokenSequence, TokenizeError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerKind {
    ByteBpe,
    /// Identity tokenizer: one subword token per word.
    WordPerToken,
}

/// A loadable subword tokenizer: byte-keyed vocab plus ranked merge
/// rules (rank = list position).
#[derive(Debug, Clone)]
pub struct TokenizerSpec {
    pub name: String,
    pub kind: TokenizerKind,
    vocab: BTreeMap<Vec<u8>, u64>,
    merges: Vec<(Vec<u8>, Vec<u8>)>,
    /// Pair -> rank index, kept in sync with `merges`.
    merge_ranks: HashMap<(Vec<u8>, Vec<u8>), usize>,
    special_tokens: HashSet<String>,
}

/// On-disk JSON form: vocab keys and merge halves are base64 of the raw
/// token bytes.
#[derive(Serialize, Deserialize)]
struct SpecFile {
    name: String,
    kind: TokenizerKind,
    #[serde(default)]
    vocab: BTreeMap<String, u64>,
    #[serde(default)]
    merges: Vec<(String, String)>,
    #[serde(default)]
    special_tokens: Vec<String>,
}

impl TokenizerSpec {
    /// Build and validate a spec. Every merge rule's concatenation must
    /// exist in the vocab.
    pub fn new(
        name: impl Into<String>,
        kind: TokenizerKind,
        vocab: BTreeMap<Vec<u8>, u64>,
        merges: Vec<(Vec<u8>, Vec<u8>)>,
        special_tokens: HashSet<String>,
    ) -> Result<Self> {
        let mut merge_ranks = HashMap::with_capacity(merges.len());
        for (i, (a, b)) in merges.iter().enumerate() {
            let mut joined = a.clone();
            joined.extend_from_slice(b);
            if !vocab.contains_key(&joined) {
                return Err(TokenizeError::MergeNotInVocab {
                    index: i,
                    bytes: joined,
                });
            }
            merge_ranks.entry((a.clone(), b.clone())).or_insert(i);
        }
        Ok(Self {
            name: name.into(),
            kind,
            vocab,
            merges,
            merge_ranks,
            special_tokens,
        })
    }

    /// The identity tokenizer.
    pub fn word_per_token(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: TokenizerKind::WordPerToken,
            vocab: BTreeMap::new(),
            merges: Vec::new(),
            merge_ranks: HashMap::new(),
            special_tokens: HashSet::new(),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn merges(&self) -> &[(Vec<u8>, Vec<u8>)] {
        &self.merges
    }

    pub fn token_id(&self, bytes: &[u8]) -> Option<u64> {
        self.vocab.get(bytes).copied()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let spec_err = |message: String| TokenizeError::SpecFile {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| spec_err(e.to_string()))?;
        let file: SpecFile =
            serde_json::from_str(&text).map_err(|e| spec_err(e.to_string()))?;

        let mut vocab = BTreeMap::new();
        for (key, id) in file.vocab {
            let bytes = BASE64
                .decode(&key)
                .map_err(|e| spec_err(format!("vocab key {key:?}: {e}")))?;
            vocab.insert(bytes, id);
        }
        let mut merges = Vec::with_capacity(file.merges.len());
        for (i, (a, b)) in file.merges.iter().enumerate() {
            let left = BASE64
                .decode(a)
                .map_err(|e| spec_err(format!("merge {i} left: {e}")))?;
            let right = BASE64
                .decode(b)
                .map_err(|e| spec_err(format!("merge {i} right: {e}")))?;
            merges.push((left, right));
        }
        Self::new(
            file.name,
            file.kind,
            vocab,
            merges,
            file.special_tokens.into_iter().collect(),
        )
    }

    pub fn to_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let spec_err = |message: String| TokenizeError::SpecFile {
            path: path.display().to_string(),
            message,
        };
        let file = SpecFile {
            name: self.name.clone(),
            kind: self.kind,
            vocab: self
                .vocab
                .iter()
                .map(|(k, v)| (BASE64.encode(k), *v))
                .collect(),
            merges: self
                .merges
                .iter()
                .map(|(a, b)| (BASE64.encode(a), BASE64.encode(b)))
                .collect(),
            special_tokens: {
                let mut v: Vec<String> = self.special_tokens.iter().cloned().collect();
                v.sort();
                v
            },
        };
        let json =
            serde_json::to_string_pretty(&file).map_err(|e| spec_err(e.to_string()))?;
        std::fs::write(path, json).map_err(|e| spec_err(e.to_string()))
    }
}

/// Map token bytes to the char-per-byte string form.
pub fn bytes_to_token(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

/// Invert [`bytes_to_token`]. Chars above U+00FF cannot appear in tokens
/// produced by this module and map to a replacement byte.
pub fn token_to_bytes(token: &str) -> Vec<u8> {
    token
        .chars()
        .map(|c| u8::try_from(c as u32).unwrap_or(b'?'))
        .collect()
}

/// Pre-tokens: maximal whitespace run attached to the following
/// non-whitespace run. Trailing whitespace with nothing after it forms
/// its own pre-token. Concatenation reproduces the input.
fn pretokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let is_ws = |i: usize| (bytes[i] as char).is_ascii_whitespace();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        // whitespace run, then non-whitespace run
        while i < bytes.len() && is_ws(i) {
            i += 1;
        }
        while i < bytes.len() && !is_ws(i) {
            i += 1;
        }
        out.push(&text[start..i]);
        start = i;
    }
    out
}

/// Greedily merge the UTF-8 bytes of each pre-token by ascending merge
/// rank. When the lowest-rank rule has several occurrences, one
/// left-to-right pass merges them all, then the sequence is rescanned.
pub fn bpe_encode(spec: &TokenizerSpec, text: &str) -> Result<TokenSequence> {
    if spec.kind != TokenizerKind::ByteBpe {
        return Err(TokenizeError::NotByteBpe {
            name: spec.name.clone(),
        });
    }
    let mut tokens = Vec::new();
    for pre in pretokenize(text) {
        // whitespace prefix is merged separately from a special-token chunk
        let chunk_start = pre
            .char_indices()
            .find(|(_, c)| !c.is_ascii_whitespace())
            .map(|(i, _)| i)
            .unwrap_or(pre.len());
        let (ws, chunk) = pre.split_at(chunk_start);
        if !chunk.is_empty() && spec.special_tokens.contains(chunk) {
            if !ws.is_empty() {
                merge_bytes(spec, ws.as_bytes(), &mut tokens)?;
            }
            let bytes = chunk.as_bytes();
            if spec.vocab.contains_key(bytes) {
                tokens.push(bytes_to_token(bytes));
            } else {
                return Err(TokenizeError::BytesNotInVocab {
                    bytes: bytes.to_vec(),
                });
            }
            continue;
        }
        merge_bytes(spec, pre.as_bytes(), &mut tokens)?;
    }
    Ok(TokenSequence::new(tokens, TokenOrigin::Subword))
}

fn merge_bytes(spec: &TokenizerSpec, bytes: &[u8], out: &mut Vec<String>) -> Result<()> {
    let mut seq: Vec<Vec<u8>> = bytes.iter().map(|&b| vec![b]).collect();
    loop {
        let mut best: Option<usize> = None;
        for pair in seq.windows(2) {
            let key = (pair[0].clone(), pair[1].clone());
            if let Some(&rank) = spec.merge_ranks.get(&key) {
                best = Some(best.map_or(rank, |b: usize| b.min(rank)));
            }
        }
        let Some(rank) = best else { break };
        let (ra, rb) = &spec.merges[rank];
        let mut next = Vec::with_capacity(seq.len());
        let mut i = 0;
        while i < seq.len() {
            if i + 1 < seq.len() && &seq[i] == ra && &seq[i + 1] == rb {
                let mut joined = seq[i].clone();
                joined.extend_from_slice(&seq[i + 1]);
                next.push(joined);
                i += 2;
            } else {
                next.push(seq[i].clone());
                i += 1;
            }
        }
        seq = next;
    }
    for piece in seq {
        if !spec.vocab.contains_key(&piece) {
            return Err(TokenizeError::BytesNotInVocab { bytes: piece });
        }
        out.push(bytes_to_token(&piece));
    }
    Ok(())
}
