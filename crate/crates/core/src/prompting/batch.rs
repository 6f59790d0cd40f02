//! Driving a corpus through a chat client: per-sentence retry with
//! caching, and a bounded worker pool over the whole split.
//!
//! The cache key is the exact request (messages, model, temperature,
//! output budget), so a warm cache replays a previous run without a
//! single network call, and any change to the prompt or decoding
//! parameters transparently misses.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Mutex;

use super::cache::{now_unix, Cache, CacheRecord};
use super::client::{ChatClient, RetryPolicy};
use super::template::{normalize_response, render, PromptTemplate};
use super::{ExemplarSet, PromptError, Result};
use crate::corpus::Corpus;

/// One model answer, normalized and tagged with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelResponse {
    pub raw_text: String,
    pub normalized_text: String,
    /// Wall time spent obtaining the answer; 0 for cache hits.
    pub latency_ms: u64,
    pub from_cache: bool,
    pub provider_meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub model_id: String,
    pub temperature: f64,
    pub retry: RetryPolicy,
    /// Number of worker threads; requests on one worker are serial.
    pub parallelism: usize,
    /// Highest tolerated failed fraction before the whole batch is
    /// reported as an error (failures beyond it still carry partial
    /// results). 0.0 means any failure aborts.
    pub failure_threshold: f64,
}

impl BatchOptions {
    pub fn new(model_id: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            temperature: super::template::DEFAULT_TEMPERATURE,
            retry: RetryPolicy::default(),
            parallelism: 1,
            failure_threshold: 0.0,
        }
    }
}

/// Results of a corpus run, keyed by sentence id.
#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub responses: BTreeMap<String, ModelResponse>,
    /// Sentence id → error description for pairs that failed.
    pub failures: BTreeMap<String, String>,
}

/// Obtain one completion, consulting the cache first and retrying
/// transient failures with backoff. Only successfully normalized
/// responses are cached, so failures are always retried by later runs.
pub fn correct(
    bundle: &super::PromptBundle,
    client: &dyn ChatClient,
    cache: &Cache,
    retry: &RetryPolicy,
) -> Result<ModelResponse> {
    if retry.max_attempts == 0 {
        return Err(PromptError::InvalidRetryPolicy);
    }
    let key = bundle.cache_key();
    if let Some(record) = cache.load(&key)? {
        return Ok(ModelResponse {
            raw_text: record.raw_text,
            normalized_text: record.normalized_text,
            latency_ms: 0,
            from_cache: true,
            provider_meta: record.provider_meta,
        });
    }

    let started = std::time::Instant::now();
    let mut last_err: Option<PromptError> = None;
    for attempt in 0..retry.max_attempts {
        if attempt > 0 {
            std::thread::sleep(retry.delay(attempt - 1));
        }
        match client.complete(bundle) {
            Ok(raw) => {
                let normalized = normalize_response(&raw.text)?;
                let record = CacheRecord {
                    request: bundle.clone(),
                    raw_text: raw.text.clone(),
                    normalized_text: normalized.clone(),
                    timestamp: now_unix(),
                    provider_meta: raw.meta.clone(),
                };
                cache.store(&record)?;
                return Ok(ModelResponse {
                    raw_text: raw.text,
                    normalized_text: normalized,
                    latency_ms: started.elapsed().as_millis() as u64,
                    from_cache: false,
                    provider_meta: raw.meta,
                });
            }
            Err(e) if e.is_retryable() => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(PromptError::RetriesExhausted {
        provider: client.provider_name().to_string(),
        attempts: retry.max_attempts,
        last: last_err
            .expect("at least one attempt ran before retries were exhausted")
            .to_string(),
    })
}

/// Run every pair of `corpus` through the client under `template`,
/// with `options.parallelism` workers sharing one queue.
pub fn correct_corpus(
    corpus: &Corpus,
    template: &PromptTemplate,
    exemplars: Option<&ExemplarSet>,
    client: &dyn ChatClient,
    cache: &Cache,
    options: &BatchOptions,
) -> Result<BatchOutcome> {
    if options.parallelism == 0 {
        return Err(PromptError::InvalidParallelism);
    }
    let pairs = corpus.pairs();
    let total = pairs.len();
    let queue: Mutex<VecDeque<&crate::corpus::SentencePair>> =
        Mutex::new(pairs.iter().collect());
    let responses = Mutex::new(BTreeMap::new());
    let failures = Mutex::new(BTreeMap::new());

    let workers = options.parallelism.min(total.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let pair = match queue.lock().unwrap().pop_front() {
                    Some(p) => p,
                    None => break,
                };
                let result = render(
                    template,
                    &corpus.language,
                    exemplars,
                    &pair.source,
                    &options.model_id,
                    options.temperature,
                )
                .and_then(|bundle| correct(&bundle, client, cache, &options.retry));
                match result {
                    Ok(response) => {
                        responses.lock().unwrap().insert(pair.id.clone(), response);
                    }
                    Err(e) => {
                        failures.lock().unwrap().insert(pair.id.clone(), e.to_string());
                    }
                }
            });
        }
    });

    let outcome = BatchOutcome {
        responses: responses.into_inner().unwrap(),
        failures: failures.into_inner().unwrap(),
    };
    let failed = outcome.failures.len();
    if failed as f64 > options.failure_threshold * total as f64 {
        return Err(PromptError::TooManyFailures {
            failed,
            total,
            partial: Box::new(outcome),
        });
    }
    Ok(outcome)
}
