//! Run configuration: one TOML file describing languages, providers,
//! systems, metrics, and tokenizers.
//!
//! Relative paths in the file resolve against the directory the config
//! lives in, so a config travels with its data. Credentials never
//! appear here — each provider names the environment variable that
//! holds its key.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::Deserialize;

use gec_core::corpus::{Language, LoadOptions, Script, Split, TwoColumnFormat};
use gec_core::prompting::{PromptStyle, PromptTemplate, ProviderPreset};
use gec_core::tokenize::Side;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Fallback seed for seeded choices that do not set their own.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Tolerated failed fraction per correction run, in [0, 1].
    #[serde(default)]
    pub failure_threshold: f64,
    pub splits: Vec<Split>,
    pub languages: Vec<LanguageConfig>,
    #[serde(default)]
    pub providers: Vec<ProviderPreset>,
    #[serde(default)]
    pub systems: Vec<SystemConfig>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default)]
    pub tokenizers: Vec<TokenizerConfig>,
    /// Directory of the config file; anchor for relative paths.
    #[serde(skip)]
    base: PathBuf,
}

fn default_data_dir() -> PathBuf {
    "data".into()
}

fn default_cache_dir() -> PathBuf {
    "cache".into()
}

fn default_out_dir() -> PathBuf {
    "out".into()
}

fn default_seed() -> u64 {
    13
}

fn default_parallelism() -> usize {
    1
}

fn default_format() -> TwoColumnFormat {
    TwoColumnFormat::Tsv
}

fn default_beta() -> f64 {
    0.5
}

fn default_dim() -> usize {
    64
}

fn default_side() -> Side {
    Side::Source
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageConfig {
    pub code: String,
    /// Display name; optional for the built-in task languages.
    pub name: Option<String>,
    pub script: Option<Script>,
    #[serde(default = "default_format")]
    pub format: TwoColumnFormat,
}

impl LanguageConfig {
    pub fn resolve(&self) -> Result<Language> {
        if let (Some(name), Some(script)) = (&self.name, self.script) {
            return Language::new(self.code.clone(), name.clone(), script)
                .with_context(|| format!("language {:?}", self.code));
        }
        Language::builtin(&self.code).with_context(|| {
            format!(
                "language {:?} is not built in; set name and script explicitly",
                self.code
            )
        })
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            format: self.format,
            ..LoadOptions::default()
        }
    }

    fn extension(&self) -> &'static str {
        match self.format {
            TwoColumnFormat::Tsv => "tsv",
            TwoColumnFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub name: String,
    /// Name of a `[[providers]]` entry.
    pub provider: String,
    pub model_id: String,
    /// Name of a bundled prompt template preset.
    pub template: String,
    #[serde(default)]
    pub temperature: f64,
    pub exemplars: Option<ExemplarConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "mode")]
pub enum ExemplarConfig {
    /// Seeded draw from the language's train split.
    Random { k: usize, seed: Option<u64> },
    /// Fixed pairs from a two-column TSV; `{code}` in the path is
    /// replaced by the language code.
    Curated { k: usize, path: String },
}

impl ExemplarConfig {
    pub fn k(&self) -> usize {
        match self {
            ExemplarConfig::Random { k, .. } | ExemplarConfig::Curated { k, .. } => *k,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    /// β for the edit-level F score.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            beta: default_beta(),
            embedding: EmbeddingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "provider")]
pub enum EmbeddingConfig {
    /// Deterministic hash embeddings; no network, fully reproducible.
    Hash {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// An external embedding endpoint.
    Http { name: String, url: String, dim: usize },
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig::Hash { dim: default_dim() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenizerConfig {
    /// Path to a tokenizer spec JSON file.
    pub path: String,
    /// Which side of each pair to profile.
    #[serde(default = "default_side")]
    pub side: Side,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config: Config = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        config.base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == CONFIG_SCHEMA_VERSION,
            "unsupported config schema_version {} (this build reads {})",
            self.schema_version,
            CONFIG_SCHEMA_VERSION
        );
        ensure!(!self.splits.is_empty(), "splits must not be empty");
        ensure!(!self.languages.is_empty(), "languages must not be empty");
        ensure!(self.parallelism >= 1, "parallelism must be at least 1");
        ensure!(
            (0.0..=1.0).contains(&self.failure_threshold),
            "failure_threshold must be in [0, 1]"
        );
        ensure!(
            self.metrics.beta.is_finite() && self.metrics.beta > 0.0,
            "metrics.beta must be a positive finite number"
        );

        let mut split_set = HashSet::new();
        for split in &self.splits {
            ensure!(split_set.insert(split), "duplicate split {split}");
        }
        let mut codes = HashSet::new();
        for lang in &self.languages {
            ensure!(
                codes.insert(lang.code.as_str()),
                "duplicate language code {:?}",
                lang.code
            );
            lang.resolve()?;
        }
        let mut provider_names = HashSet::new();
        for provider in &self.providers {
            ensure!(
                provider_names.insert(provider.name.as_str()),
                "duplicate provider {:?}",
                provider.name
            );
            ensure!(
                !provider.auth_env_var.is_empty(),
                "provider {:?} must name its credential environment variable",
                provider.name
            );
        }
        let mut system_names = HashSet::new();
        for system in &self.systems {
            ensure!(
                system_names.insert(system.name.as_str()),
                "duplicate system {:?}",
                system.name
            );
            ensure!(
                provider_names.contains(system.provider.as_str()),
                "system {:?} references unknown provider {:?}",
                system.name,
                system.provider
            );
            let template = PromptTemplate::preset(&system.template).with_context(|| {
                format!(
                    "system {:?} references unknown template {:?}",
                    system.name, system.template
                )
            })?;
            ensure!(
                system.temperature.is_finite() && (0.0..=2.0).contains(&system.temperature),
                "system {:?}: temperature must be in [0, 2]",
                system.name
            );
            match (&template.style, &system.exemplars) {
                (PromptStyle::FewShot, None) => bail!(
                    "system {:?} uses few-shot template {:?} but configures no exemplars",
                    system.name,
                    system.template
                ),
                (PromptStyle::ZeroShot, Some(_)) => bail!(
                    "system {:?} configures exemplars but template {:?} is zero-shot",
                    system.name,
                    system.template
                ),
                _ => {}
            }
            if let Some(exemplars) = &system.exemplars {
                ensure!(
                    exemplars.k() >= 1,
                    "system {:?}: exemplar k must be at least 1",
                    system.name
                );
            }
        }
        Ok(())
    }

    /// Apply command-line overrides on top of the file.
    pub fn apply_overrides(
        &mut self,
        out: Option<PathBuf>,
        seed: Option<u64>,
        parallelism: Option<usize>,
    ) -> Result<()> {
        if let Some(out) = out {
            self.out_dir = out;
        }
        if let Some(seed) = seed {
            self.seed = seed;
        }
        if let Some(parallelism) = parallelism {
            ensure!(parallelism >= 1, "parallelism must be at least 1");
            self.parallelism = parallelism;
        }
        Ok(())
    }

    fn resolve(&self, path: impl AsRef<Path>) -> PathBuf {
        let path = path.as_ref();
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.resolve(&self.data_dir)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.resolve(&self.cache_dir)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    pub fn corpus_path(&self, lang: &LanguageConfig, split: Split) -> PathBuf {
        self.data_dir()
            .join(&lang.code)
            .join(format!("{split}.{}", lang.extension()))
    }

    pub fn tokenizer_path(&self, tokenizer: &TokenizerConfig) -> PathBuf {
        self.resolve(&tokenizer.path)
    }

    /// Resolve a curated exemplar path for one language.
    pub fn curated_path(&self, raw: &str, code: &str) -> PathBuf {
        self.resolve(raw.replace("{code}", code))
    }

    pub fn provider(&self, name: &str) -> Result<&ProviderPreset> {
        self.providers
            .iter()
            .find(|p| p.name == name)
            .with_context(|| format!("unknown provider {name:?}"))
    }

    pub fn language(&self, code: &str) -> Result<&LanguageConfig> {
        self.languages
            .iter()
            .find(|l| l.code == code)
            .with_context(|| format!("language {code:?} is not in the config"))
    }

    pub fn system(&self, name: &str) -> Result<&SystemConfig> {
        self.systems
            .iter()
            .find(|s| s.name == name)
            .with_context(|| format!("unknown system {name:?}"))
    }
}
