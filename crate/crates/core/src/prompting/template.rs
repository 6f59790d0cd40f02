//! Prompt templates, bundle rendering, and response normalization.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::exemplar::ExemplarSet;
use super::{PromptError, Result};
use crate::corpus::Language;

/// Decoding temperature used when a run does not configure one;
/// greedy decoding keeps runs cacheable and evaluations repeatable.
pub const DEFAULT_TEMPERATURE: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    ZeroShot,
    FewShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
}

/// A named system prompt with a `{language}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub name: String,
    pub system_text: String,
    pub style: PromptStyle,
}

/// The detailed few-shot instruction used for the Dravidian-language
/// runs, reproduced as preset data.
const GEMINI_STYLE_BODY: &str = "\
You are a {language} Grammatical Error Correction assistant, in low resource settings. \
Your task is to accurately identify and correct grammatical errors in the given \
{language} sentence. Correct all types of grammatical errors:
Verb usage: Correct conjugation, tense, aspect, and agreement with the subject.,
Pronouns: Usage of proper personal, possessive, and reflexive pronouns.,
Prepositions: Correct use of postpositions or prepositions in context.,
Fix spelling mistakes, diacritic marks (matras), and punctuation errors.,
Gender and number agreement: Ensure adjectives, nouns, and verbs match in gender \
(masculine/feminine) and number (singular/plural).,
The output should be ONLY the CORRECTED sentence, without any extra text or explanation. \
If the input is already correct, return it unchanged. Please ensure the corrections \
follow the rules and preserve the intended meaning.";

/// The minimal instruction used for the Indo-Aryan and Telugu runs.
const GPT_STYLE_BODY: &str = "\
You are a Grammatical Error Correction (GEC) assistant for low-resource Indian languages.
Your job: correct only grammar, spelling, spacing, matras/diacritics, punctuation, and light word-form errors.
Do NOT translate. Preserve the meaning, script, and style of the input language.
Return ONLY the corrected sentence with no quotes, no labels, no extra text.
If the input is already correct, return it unchanged.";

const EXEMPLAR_CLAUSE: &str = "Below are 10 random sentences for your reference.";

impl PromptTemplate {
    /// Validates that the text is nonempty and, for few-shot style,
    /// ends with a line that introduces the exemplars. The clause check
    /// is lexical (final line mentions "example" or "reference"): it
    /// cannot judge meaning, but it catches templates that forget to
    /// hand off to the exemplars entirely.
    pub fn new(
        name: impl Into<String>,
        system_text: impl Into<String>,
        style: PromptStyle,
    ) -> Result<Self> {
        let name = name.into();
        let system_text = system_text.into();
        if system_text.trim().is_empty() {
            return Err(PromptError::EmptyTemplate);
        }
        if style == PromptStyle::FewShot {
            let last_line = system_text
                .trim_end()
                .lines()
                .last()
                .unwrap_or("")
                .to_lowercase();
            if !last_line.contains("example") && !last_line.contains("reference") {
                return Err(PromptError::MissingExemplarClause { name });
            }
        }
        Ok(Self {
            name,
            system_text,
            style,
        })
    }

    /// All bundled presets.
    pub fn presets() -> Vec<PromptTemplate> {
        let fewshot = |body: &str| format!("{body}\n{EXEMPLAR_CLAUSE}");
        [
            ("gemini-fewshot", fewshot(GEMINI_STYLE_BODY), PromptStyle::FewShot),
            ("gemini-zeroshot", GEMINI_STYLE_BODY.to_string(), PromptStyle::ZeroShot),
            ("gpt-fewshot", fewshot(GPT_STYLE_BODY), PromptStyle::FewShot),
            ("gpt-zeroshot", GPT_STYLE_BODY.to_string(), PromptStyle::ZeroShot),
        ]
        .into_iter()
        .map(|(name, text, style)| {
            PromptTemplate::new(name, text, style).expect("presets are valid by construction")
        })
        .collect()
    }

    pub fn preset(name: &str) -> Option<PromptTemplate> {
        Self::presets().into_iter().find(|t| t.name == name)
    }

    /// Hash of name, style, and exact text; recorded in reports so a
    /// score can be traced to the prompt that produced it.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.name.as_bytes());
        hasher.update([0]);
        hasher.update(match self.style {
            PromptStyle::ZeroShot => "zero_shot",
            PromptStyle::FewShot => "few_shot",
        });
        hasher.update([0]);
        hasher.update(self.system_text.as_bytes());
        hex::encode(hasher.finalize())
    }
}

/// A fully rendered chat request. The four fields are exactly the cache
/// identity: nothing else may influence the provider's answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub messages: Vec<Message>,
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: usize,
}

impl PromptBundle {
    /// Content-addressed key: SHA-256 over the canonical JSON of the
    /// whole bundle. Any change to messages, model, or decoding
    /// parameters produces a new key.
    pub fn cache_key(&self) -> String {
        let json = serde_json::to_vec(self).expect("bundle serialization cannot fail");
        hex::encode(Sha256::digest(&json))
    }

    /// The sentence being corrected: text of the final user message.
    pub fn input_sentence(&self) -> &str {
        self.messages
            .last()
            .map(|m| m.text.as_str())
            .unwrap_or_default()
    }
}

/// Assemble the message list for one input sentence. The sentence is
/// copied into the final user message verbatim — no normalization, no
/// wrapping — and `max_output_tokens` is provisioned at four times the
/// input codepoint count.
pub fn render(
    template: &PromptTemplate,
    language: &Language,
    exemplars: Option<&ExemplarSet>,
    input_sentence: &str,
    model_id: &str,
    temperature: f64,
) -> Result<PromptBundle> {
    let exemplars = match (template.style, exemplars) {
        (PromptStyle::ZeroShot, None) => &[][..],
        (PromptStyle::ZeroShot, Some(_)) => {
            return Err(PromptError::ExemplarsNotAllowed {
                template: template.name.clone(),
            })
        }
        (PromptStyle::FewShot, None) => {
            return Err(PromptError::ExemplarsRequired {
                template: template.name.clone(),
            })
        }
        (PromptStyle::FewShot, Some(set)) if set.exemplars.is_empty() => {
            return Err(PromptError::EmptyExemplars)
        }
        (PromptStyle::FewShot, Some(set)) => set.exemplars.as_slice(),
    };

    let mut messages = Vec::with_capacity(2 * exemplars.len() + 2);
    messages.push(Message {
        role: Role::System,
        text: template
            .system_text
            .replace("{language}", &language.display_name),
    });
    for (erroneous, corrected) in exemplars {
        messages.push(Message {
            role: Role::User,
            text: erroneous.clone(),
        });
        messages.push(Message {
            role: Role::Assistant,
            text: corrected.clone(),
        });
    }
    messages.push(Message {
        role: Role::User,
        text: input_sentence.to_string(),
    });

    Ok(PromptBundle {
        messages,
        model_id: model_id.to_string(),
        temperature,
        max_output_tokens: input_sentence.chars().count() * 4,
    })
}

/// Quote pairs eligible for stripping when they wrap the whole string.
const QUOTE_PAIRS: &[(char, char)] = &[('"', '"'), ('\'', '\''), ('“', '”'), ('‘', '’')];

fn strip_wrapping_quotes(s: &str) -> &str {
    let mut chars = s.chars();
    let (Some(first), Some(last)) = (chars.next(), chars.next_back()) else {
        return s;
    };
    // a single character cannot wrap itself
    if s.chars().nth(1).is_none() {
        return s;
    }
    if QUOTE_PAIRS.contains(&(first, last)) {
        &s[first.len_utf8()..s.len() - last.len_utf8()]
    } else {
        s
    }
}

/// Clean a raw model reply into the corrected sentence: trim, collapse
/// every CR/LF run into one space, and strip wrapping quote pairs
/// (ASCII or typographic). Stripping repeats until stable, which makes
/// the whole function idempotent. Nothing else is altered; in
/// particular label prefixes are preserved so instruction violations
/// remain observable.
pub fn normalize_response(raw: &str) -> Result<String> {
    let mut collapsed = String::with_capacity(raw.len());
    let mut in_newline_run = false;
    for c in raw.trim().chars() {
        if c == '\r' || c == '\n' {
            if !in_newline_run {
                collapsed.push(' ');
                in_newline_run = true;
            }
        } else {
            collapsed.push(c);
            in_newline_run = false;
        }
    }
    let mut current = collapsed.trim();
    loop {
        let stripped = strip_wrapping_quotes(current).trim();
        if stripped == current {
            break;
        }
        current = stripped;
    }
    if current.is_empty() {
        return Err(PromptError::EmptyResponse {
            raw: raw.to_string(),
        });
    }
    Ok(current.to_string())
}
