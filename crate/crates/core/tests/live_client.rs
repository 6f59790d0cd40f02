//! End-to-end exercises of the HTTP client and batch driver against a
//! live in-process mock server: retries, caching, parallelism bounds,
//! and failure thresholds.

use std::sync::Once;
use std::time::Duration;

use gec_core::corpus::{Corpus, Language, SentencePair, Split};
use gec_core::prompting::{
    correct, correct_corpus, BatchOptions, Cache, Dialect, HttpChatClient, Message, PromptBundle,
    PromptError, PromptTemplate, ProviderPreset, RetryPolicy, Role,
};
use gec_mockchat::{MockChatServer, Reply};

const KEY_VAR: &str = "GEC_MOCK_API_KEY";

fn ensure_key() {
    static SET: Once = Once::new();
    SET.call_once(|| std::env::set_var(KEY_VAR, "test-key"));
}

fn client_for(server: &MockChatServer, dialect: Dialect, rpm_limit: u32) -> HttpChatClient {
    ensure_key();
    HttpChatClient::new(ProviderPreset {
        name: "mock".into(),
        base_url: server.url(),
        auth_env_var: KEY_VAR.into(),
        dialect,
        rpm_limit,
    })
    .unwrap()
}

fn bundle(input: &str) -> PromptBundle {
    PromptBundle {
        messages: vec![
            Message {
                role: Role::System,
                text: "Correct the sentence.".into(),
            },
            Message {
                role: Role::User,
                text: input.into(),
            },
        ],
        model_id: "mock-model".into(),
        temperature: 0.0,
        max_output_tokens: 64,
    }
}

fn hindi_corpus(sources: &[&str]) -> Corpus {
    let language = Language::builtin("hi").unwrap();
    let pairs = sources
        .iter()
        .enumerate()
        .map(|(i, s)| SentencePair {
            id: format!("p{i}"),
            source: s.to_string(),
            reference: s.to_string(),
            language: language.clone(),
        })
        .collect();
    Corpus::new(language, Split::Test, pairs).unwrap()
}

fn temp_cache() -> (tempfile::TempDir, Cache) {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path().join("cache")).unwrap();
    (dir, cache)
}

#[test]
fn transient_failures_are_retried_to_success() {
    let server = MockChatServer::start().unwrap();
    server.script([Reply::error(429), Reply::error(500), Reply::ok_text(" सही वाक्य ")]);
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();

    let response = correct(&bundle("गलत वाक्य"), &client, &cache, &RetryPolicy::immediate(4))
        .unwrap();
    assert_eq!(response.normalized_text, "सही वाक्य");
    assert!(!response.from_cache);
    assert_eq!(server.request_count(), 3);
}

#[test]
fn persistent_failure_consumes_exactly_max_attempts() {
    let server = MockChatServer::start().unwrap();
    server.script((0..10).map(|_| Reply::error(503)));
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();

    let err = correct(&bundle("x"), &client, &cache, &RetryPolicy::immediate(3)).unwrap_err();
    match err {
        PromptError::RetriesExhausted { attempts, .. } => assert_eq!(attempts, 3),
        other => panic!("expected RetriesExhausted, got {other:?}"),
    }
    assert_eq!(server.request_count(), 3, "one request per allowed attempt");
    assert!(cache.keys().unwrap().is_empty(), "failures are never cached");
}

#[test]
fn client_errors_fail_fast_without_retry() {
    let server = MockChatServer::start().unwrap();
    server.script([Reply::error(401)]);
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();

    let err = correct(&bundle("x"), &client, &cache, &RetryPolicy::immediate(5)).unwrap_err();
    assert!(matches!(err, PromptError::Http { status: 401, .. }));
    assert_eq!(server.request_count(), 1);
}

#[test]
fn malformed_response_shape_is_a_protocol_error() {
    let server = MockChatServer::start().unwrap();
    server.script([Reply::raw_json(200, r#"{"unexpected": true}"#)]);
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();

    let err = correct(&bundle("x"), &client, &cache, &RetryPolicy::immediate(4)).unwrap_err();
    assert!(matches!(err, PromptError::Protocol { .. }));
    assert_eq!(server.request_count(), 1, "protocol errors are not retried");
}

#[test]
fn google_dialect_sends_and_parses_its_shape() {
    let server = MockChatServer::start().unwrap();
    server.script([Reply::raw_json(
        200,
        r#"{"candidates":[{"content":{"parts":[{"text":"சரியான"},{"text":" சொல்"}]}}]}"#,
    )]);
    let client = client_for(&server, Dialect::GoogleGenerateContent, 0);
    let (_dir, cache) = temp_cache();

    let response = correct(&bundle("தவறு"), &client, &cache, &RetryPolicy::immediate(2)).unwrap();
    assert_eq!(response.normalized_text, "சரியான சொல்");

    let bodies = server.request_bodies();
    assert_eq!(bodies.len(), 1);
    let sent: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(sent["system_instruction"]["parts"][0]["text"], "Correct the sentence.");
    assert_eq!(sent["contents"][0]["role"], "user");
    assert_eq!(sent["contents"][0]["parts"][0]["text"], "தவறு");
    assert!(sent["generationConfig"]["maxOutputTokens"].is_number());
}

#[test]
fn echoed_corpus_round_trips_every_sentence() {
    let server = MockChatServer::start().unwrap();
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();
    let corpus = hindi_corpus(&["मैं घर जाता हूँ", "वह खेलती है", "हम खाना खाते हैं"]);
    let template = PromptTemplate::preset("gpt-zeroshot").unwrap();

    let outcome = correct_corpus(
        &corpus,
        &template,
        None,
        &client,
        &cache,
        &BatchOptions::new("mock-model"),
    )
    .unwrap();

    assert!(outcome.failures.is_empty());
    assert_eq!(outcome.responses.len(), 3);
    for pair in corpus.pairs() {
        assert_eq!(outcome.responses[&pair.id].normalized_text, pair.source);
    }
}

#[test]
fn warm_cache_rerun_makes_no_network_calls() {
    let server = MockChatServer::start().unwrap();
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();
    let corpus = hindi_corpus(&["एक", "दो", "तीन", "चार"]);
    let template = PromptTemplate::preset("gpt-zeroshot").unwrap();
    let options = BatchOptions::new("mock-model");

    let cold = correct_corpus(&corpus, &template, None, &client, &cache, &options).unwrap();
    assert!(cold.responses.values().all(|r| !r.from_cache));
    let after_cold = server.request_count();
    assert_eq!(after_cold, 4);

    let warm = correct_corpus(&corpus, &template, None, &client, &cache, &options).unwrap();
    assert!(warm.responses.values().all(|r| r.from_cache));
    assert_eq!(server.request_count(), after_cold, "warm run must stay offline");
    for (id, response) in &warm.responses {
        assert_eq!(response.normalized_text, cold.responses[id].normalized_text);
    }
}

#[test]
fn worker_pool_respects_the_parallelism_bound() {
    let server = MockChatServer::start().unwrap();
    server.set_delay(Duration::from_millis(60));
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();
    let sources: Vec<String> = (0..9).map(|i| format!("वाक्य {i}")).collect();
    let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
    let corpus = hindi_corpus(&refs);
    let template = PromptTemplate::preset("gpt-zeroshot").unwrap();
    let mut options = BatchOptions::new("mock-model");
    options.parallelism = 3;

    let outcome = correct_corpus(&corpus, &template, None, &client, &cache, &options).unwrap();
    assert_eq!(outcome.responses.len(), 9);
    assert!(
        server.max_concurrency() <= 3,
        "saw {} concurrent requests with a pool of 3",
        server.max_concurrency()
    );
    assert!(server.max_concurrency() >= 2, "workers never overlapped");
}

#[test]
fn rate_limit_spaces_consecutive_requests() {
    let server = MockChatServer::start().unwrap();
    // 600 rpm → at least 100ms between request starts
    let client = client_for(&server, Dialect::OpenaiChat, 600);
    let (_dir, cache) = temp_cache();

    let started = std::time::Instant::now();
    for i in 0..3 {
        correct(
            &bundle(&format!("वाक्य {i}")),
            &client,
            &cache,
            &RetryPolicy::immediate(1),
        )
        .unwrap();
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed >= Duration::from_millis(200),
        "3 requests at 600 rpm finished in {elapsed:?}"
    );
}

#[test]
fn zero_tolerance_aborts_on_any_failure_with_partial_results() {
    let server = MockChatServer::start().unwrap();
    server.script([Reply::error(400)]); // first request fails hard, rest echo
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();
    let corpus = hindi_corpus(&["एक", "दो", "तीन", "चार"]);
    let template = PromptTemplate::preset("gpt-zeroshot").unwrap();
    let options = BatchOptions::new("mock-model"); // parallelism 1 → deterministic order

    let err = correct_corpus(&corpus, &template, None, &client, &cache, &options).unwrap_err();
    match err {
        PromptError::TooManyFailures { failed, total, partial } => {
            assert_eq!((failed, total), (1, 4));
            assert_eq!(partial.responses.len(), 3);
            assert!(partial.failures.contains_key("p0"));
        }
        other => panic!("expected TooManyFailures, got {other:?}"),
    }
}

#[test]
fn loose_threshold_tolerates_isolated_failures() {
    let server = MockChatServer::start().unwrap();
    server.script([Reply::error(400)]);
    let client = client_for(&server, Dialect::OpenaiChat, 0);
    let (_dir, cache) = temp_cache();
    let corpus = hindi_corpus(&["एक", "दो", "तीन", "चार"]);
    let template = PromptTemplate::preset("gpt-zeroshot").unwrap();
    let mut options = BatchOptions::new("mock-model");
    options.failure_threshold = 0.5;

    let outcome = correct_corpus(&corpus, &template, None, &client, &cache, &options).unwrap();
    assert_eq!(outcome.responses.len(), 3);
    assert_eq!(outcome.failures.len(), 1);
    let note = &outcome.failures["p0"];
    assert!(note.contains("400"), "failure note should carry the status: {note}");
}
