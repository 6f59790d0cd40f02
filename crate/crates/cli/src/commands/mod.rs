//! Subcommand implementations. Each takes a loaded [`Config`] plus its
//! own filters and writes results under the configured output
//! directory.

mod correct;
mod evaluate;
mod fertility;
mod report;
mod validate;

pub use correct::{run_correct, RunManifest};
pub use evaluate::{run_evaluate, score_run, RunScores};
pub use fertility::run_fertility;
pub use report::run_report;
pub use validate::run_validate;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::{Config, LanguageConfig, SystemConfig};
use gec_core::corpus::{load_two_column, Corpus, Split};

/// Selection narrowing shared by `correct` and `evaluate`.
#[derive(Debug, Default, Clone)]
pub struct Filter {
    pub system: Option<String>,
    pub language: Option<String>,
    pub split: Option<Split>,
}

impl Filter {
    /// Systems in config order, narrowed by `--system`. Unknown names
    /// are an error rather than a silent empty selection.
    fn systems<'c>(&self, config: &'c Config) -> Result<Vec<&'c SystemConfig>> {
        match &self.system {
            Some(name) => Ok(vec![config.system(name)?]),
            None => Ok(config.systems.iter().collect()),
        }
    }

    fn languages<'c>(&self, config: &'c Config) -> Result<Vec<&'c LanguageConfig>> {
        match &self.language {
            Some(code) => Ok(vec![config.language(code)?]),
            None => Ok(config.languages.iter().collect()),
        }
    }

    fn splits(&self, config: &Config) -> Result<Vec<Split>> {
        match self.split {
            Some(split) => {
                anyhow::ensure!(
                    config.splits.contains(&split),
                    "split {split} is not in the config's splits list"
                );
                Ok(vec![split])
            }
            None => Ok(config.splits.clone()),
        }
    }
}

fn load_corpus(config: &Config, lang: &LanguageConfig, split: Split) -> Result<Corpus> {
    let path = config.corpus_path(lang, split);
    load_two_column(&path, lang.resolve()?, split, lang.load_options())
        .with_context(|| format!("loading corpus {}", path.display()))
}

/// `<lang>__<system>__<split>` — the shared naming scheme for run
/// artifacts.
fn run_stem(language: &str, system: &str, split: Split) -> String {
    format!("{language}__{system}__{split}")
}

fn hyp_path(config: &Config, language: &str, system: &str, split: Split) -> PathBuf {
    config
        .out_dir()
        .join("hyp")
        .join(format!("{}.tsv", run_stem(language, system, split)))
}

fn manifest_path(config: &Config, language: &str, system: &str, split: Split) -> PathBuf {
    config
        .out_dir()
        .join("hyp")
        .join(format!("{}.manifest.json", run_stem(language, system, split)))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json = serde_json::to_string_pretty(value)?;
    json.push('\n');
    write_file(path, &json)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Print unless `--quiet`.
macro_rules! say {
    ($quiet:expr, $($arg:tt)*) => {
        if !$quiet {
            println!($($arg)*);
        }
    };
}
pub(crate) use say;
