//! Chat-completion access: one neutral trait, per-provider presets.
//!
//! A provider is described entirely by configuration — base URL, the
//! env var holding its credential, payload dialect, and a
//! requests-per-minute ceiling — so adding a provider means adding a
//! preset, not code. Credentials are read from the environment at
//! client construction, never from config files, and construction
//! fails before any request leaves the machine if the variable is
//! unset.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::template::{PromptBundle, Role};
use super::{PromptError, Result};

/// Wire format of a chat request/response pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dialect {
    /// `messages`/`choices`-shaped chat completions.
    OpenaiChat,
    /// `contents`/`candidates`-shaped generateContent calls.
    GoogleGenerateContent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderPreset {
    pub name: String,
    /// Full endpoint URL; for the generateContent dialect this includes
    /// the model segment, since that API binds the model in the URL.
    pub base_url: String,
    pub auth_env_var: String,
    pub dialect: Dialect,
    /// Requests per minute; 0 disables pacing.
    pub rpm_limit: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCompletion {
    pub text: String,
    pub meta: BTreeMap<String, String>,
}

pub trait ChatClient: Sync {
    fn provider_name(&self) -> &str;
    fn complete(&self, bundle: &PromptBundle) -> Result<RawCompletion>;
}

/// Exponential backoff with full jitter on the delay fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
    /// Fraction of each delay that may be randomly shed, in [0, 1].
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 4,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(8),
            jitter: 0.5,
        }
    }
}

impl RetryPolicy {
    /// Near-instant delays for tests against local mocks.
    pub fn immediate(max_attempts: u32) -> Self {
        Self {
            max_attempts,
            base_delay: Duration::from_millis(1),
            max_delay: Duration::from_millis(2),
            jitter: 0.0,
        }
    }

    /// Delay before retry number `attempt` (0-based): base × 2^attempt,
    /// capped, minus a random jitter share.
    pub fn delay(&self, attempt: u32) -> Duration {
        let exp = self
            .base_delay
            .saturating_mul(2u32.saturating_pow(attempt))
            .min(self.max_delay);
        if self.jitter <= 0.0 {
            return exp;
        }
        let shed = rand::thread_rng().gen_range(0.0..=self.jitter.min(1.0));
        exp.mul_f64(1.0 - shed)
    }
}

pub struct HttpChatClient {
    preset: ProviderPreset,
    api_key: String,
    http: reqwest::blocking::Client,
    /// Start time of the most recent request, for rpm pacing.
    last_request: Mutex<Option<Instant>>,
}

impl std::fmt::Debug for HttpChatClient {
    /// Never prints the credential.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpChatClient")
            .field("preset", &self.preset)
            .field("api_key", &"<redacted>")
            .finish_non_exhaustive()
    }
}

impl HttpChatClient {
    pub fn new(preset: ProviderPreset) -> Result<Self> {
        let api_key = std::env::var(&preset.auth_env_var).map_err(|_| {
            PromptError::MissingCredential {
                provider: preset.name.clone(),
                env_var: preset.auth_env_var.clone(),
            }
        })?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| PromptError::Network {
                provider: preset.name.clone(),
                message: e.to_string(),
            })?;
        Ok(Self {
            preset,
            api_key,
            http,
            last_request: Mutex::new(None),
        })
    }

    pub fn preset(&self) -> &ProviderPreset {
        &self.preset
    }

    /// Enforce the per-provider rate ceiling: consecutive request
    /// starts are spaced at least 60s/rpm apart, across all workers
    /// sharing this client.
    fn pace(&self) {
        if self.preset.rpm_limit == 0 {
            return;
        }
        let min_interval = Duration::from_secs_f64(60.0 / self.preset.rpm_limit as f64);
        let mut last = self.last_request.lock().unwrap();
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < min_interval {
                std::thread::sleep(min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }

    fn http_err(&self, status: u16, body: &str) -> PromptError {
        let mut message: String = body.chars().take(200).collect();
        if message.is_empty() {
            message = "(empty body)".into();
        }
        PromptError::Http {
            provider: self.preset.name.clone(),
            status,
            message,
        }
    }
}

impl ChatClient for HttpChatClient {
    fn provider_name(&self) -> &str {
        &self.preset.name
    }

    fn complete(&self, bundle: &PromptBundle) -> Result<RawCompletion> {
        self.pace();
        let payload = match self.preset.dialect {
            Dialect::OpenaiChat => openai_payload(bundle),
            Dialect::GoogleGenerateContent => google_payload(bundle),
        };
        let request = self.http.post(&self.preset.base_url).json(&payload);
        let request = match self.preset.dialect {
            Dialect::OpenaiChat => {
                request.header("Authorization", format!("Bearer {}", self.api_key))
            }
            Dialect::GoogleGenerateContent => request.header("x-goog-api-key", &self.api_key),
        };
        let response = request.send().map_err(|e| PromptError::Network {
            provider: self.preset.name.clone(),
            message: e.to_string(),
        })?;
        let status = response.status().as_u16();
        let body = response.text().map_err(|e| PromptError::Network {
            provider: self.preset.name.clone(),
            message: e.to_string(),
        })?;
        if !(200..300).contains(&status) {
            return Err(self.http_err(status, &body));
        }
        let value: Value = serde_json::from_str(&body).map_err(|e| PromptError::Protocol {
            provider: self.preset.name.clone(),
            message: e.to_string(),
        })?;
        let text = match self.preset.dialect {
            Dialect::OpenaiChat => parse_openai(&value),
            Dialect::GoogleGenerateContent => parse_google(&value),
        }
        .ok_or_else(|| PromptError::Protocol {
            provider: self.preset.name.clone(),
            message: "response carries no message text".into(),
        })?;
        Ok(RawCompletion {
            text,
            meta: BTreeMap::from([
                ("provider".to_string(), self.preset.name.clone()),
                ("status".to_string(), status.to_string()),
            ]),
        })
    }
}

pub(crate) fn openai_payload(bundle: &PromptBundle) -> Value {
    json!({
        "model": bundle.model_id,
        "messages": bundle
            .messages
            .iter()
            .map(|m| json!({ "role": m.role.as_str(), "content": m.text }))
            .collect::<Vec<_>>(),
        "temperature": bundle.temperature,
        "max_tokens": bundle.max_output_tokens,
    })
}

pub(crate) fn parse_openai(value: &Value) -> Option<String> {
    value["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
}

pub(crate) fn google_payload(bundle: &PromptBundle) -> Value {
    let mut system_parts = Vec::new();
    let mut contents = Vec::new();
    for m in &bundle.messages {
        match m.role {
            Role::System => system_parts.push(json!({ "text": m.text })),
            Role::User => contents.push(json!({
                "role": "user",
                "parts": [{ "text": m.text }],
            })),
            Role::Assistant => contents.push(json!({
                "role": "model",
                "parts": [{ "text": m.text }],
            })),
        }
    }
    json!({
        "system_instruction": { "parts": system_parts },
        "contents": contents,
        "generationConfig": {
            "temperature": bundle.temperature,
            "maxOutputTokens": bundle.max_output_tokens,
        },
    })
}

pub(crate) fn parse_google(value: &Value) -> Option<String> {
    let parts = value["candidates"][0]["content"]["parts"].as_array()?;
    let text: String = parts
        .iter()
        .filter_map(|p| p["text"].as_str())
        .collect::<Vec<_>>()
        .join("");
    Some(text)
}
