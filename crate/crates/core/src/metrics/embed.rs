//! Token embedding providers for the greedy-matching score.
//!
//! [`HashEmbedder`] is fully deterministic and offline: each token's
//! vector is drawn from a ChaCha stream seeded by the token's SHA-256,
//! so equal tokens embed identically across runs, machines, and match
//! exactly under cosine. [`HttpEmbedder`] delegates to a service for
//! real semantic vectors; reports must name whichever provider was
//! used, since scores are not comparable across providers.

use std::collections::HashMap;
use std::time::Duration;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{MetricError, Result};

pub trait EmbeddingProvider {
    /// Stable provider label recorded in report metadata.
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    /// One row per token, in input order.
    fn embed(&self, tokens: &[String]) -> Result<Array2<f64>>;
}

/// Offline hash-seeded embedder: surface-form identity is the only
/// similarity signal, which is exactly what deterministic tests need.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    fn token_vector(&self, token: &str) -> Vec<f64> {
        let digest = Sha256::digest(token.as_bytes());
        let seed = u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..self.dim).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for x in &mut v {
                *x /= norm;
            }
        } else {
            v[0] = 1.0;
        }
        v
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self::new(64)
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn name(&self) -> String {
        format!("hash-{}", self.dim)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, tokens: &[String]) -> Result<Array2<f64>> {
        let mut memo: HashMap<&str, Vec<f64>> = HashMap::new();
        let mut out = Array2::zeros((tokens.len(), self.dim));
        for (i, token) in tokens.iter().enumerate() {
            let v = memo
                .entry(token.as_str())
                .or_insert_with(|| self.token_vector(token));
            for (j, x) in v.iter().enumerate() {
                out[(i, j)] = *x;
            }
        }
        Ok(out)
    }
}

/// Remote embedder speaking a minimal JSON contract:
/// request `{"tokens": [...]}`, response `{"vectors": [[...], ...]}`.
pub struct HttpEmbedder {
    name: String,
    url: String,
    dim: usize,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f64>>,
}

impl HttpEmbedder {
    pub fn new(name: impl Into<String>, url: impl Into<String>, dim: usize) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .expect("default TLS-free client construction cannot fail");
        Self {
            name: name.into(),
            url: url.into(),
            dim,
            client,
        }
    }

    fn provider_err(&self, message: impl Into<String>) -> MetricError {
        MetricError::EmbeddingProvider {
            provider: self.name.clone(),
            message: message.into(),
        }
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, tokens: &[String]) -> Result<Array2<f64>> {
        let response = self
            .client
            .post(&self.url)
            .json(&serde_json::json!({ "tokens": tokens }))
            .send()
            .map_err(|e| self.provider_err(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(self.provider_err(format!("HTTP {}", status.as_u16())));
        }
        let body: EmbedResponse = response
            .json()
            .map_err(|e| self.provider_err(format!("bad response body: {e}")))?;
        if body.vectors.len() != tokens.len() {
            return Err(self.provider_err(format!(
                "expected {} vectors, got {}",
                tokens.len(),
                body.vectors.len()
            )));
        }
        let mut out = Array2::zeros((tokens.len(), self.dim));
        for (i, v) in body.vectors.iter().enumerate() {
            if v.len() != self.dim {
                return Err(self.provider_err(format!(
                    "vector {} has dimension {}, expected {}",
                    i,
                    v.len(),
                    self.dim
                )));
            }
            for (j, x) in v.iter().enumerate() {
                out[(i, j)] = *x;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::bertscore;

    fn toks(list: &[&str]) -> Vec<String> {
        list.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn hash_embedder_is_deterministic() {
        let e = HashEmbedder::new(16);
        let a = e.embed(&toks(&["नमस्ते", "दुनिया"])).unwrap();
        let b = e.embed(&toks(&["नमस्ते", "दुनिया"])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn equal_tokens_embed_identically_and_distinct_differ() {
        let e = HashEmbedder::new(16);
        let m = e.embed(&toks(&["a", "b", "a"])).unwrap();
        assert_eq!(m.row(0), m.row(2));
        assert_ne!(m.row(0), m.row(1));
    }

    #[test]
    fn hash_embedder_rows_are_unit_norm() {
        let e = HashEmbedder::new(8);
        let m = e.embed(&toks(&["x", "yy", "zzz"])).unwrap();
        for row in m.rows() {
            let norm = row.dot(&row).sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_token_lists_score_one_under_bertscore() {
        let e = HashEmbedder::default();
        let tokens = toks(&["यह", "वाक्य", "ठीक", "है"]);
        let h = e.embed(&tokens).unwrap();
        let r = e.embed(&tokens).unwrap();
        let got = bertscore(&h, &r, None).unwrap();
        assert_eq!(got.f1, 1.0);
    }

    #[test]
    fn dim_and_name_are_reported() {
        let e = HashEmbedder::new(32);
        assert_eq!(e.dim(), 32);
        assert_eq!(e.name(), "hash-32");
        let h = HttpEmbedder::new("svc", "http://127.0.0.1:1/embed", 4);
        assert_eq!(h.dim(), 4);
        assert_eq!(h.name(), "svc");
    }

    #[test]
    fn http_embedder_reports_connection_failures() {
        // nothing listens on port 9; expect a provider error, not a panic
        let e = HttpEmbedder::new("svc", "http://127.0.0.1:9/embed", 4);
        let err = e.embed(&toks(&["x"])).unwrap_err();
        assert!(matches!(err, MetricError::EmbeddingProvider { .. }));
    }
}
