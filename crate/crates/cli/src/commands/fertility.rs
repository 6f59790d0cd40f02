//! `gec fertility`: profile subword token counts per word for every
//! configured tokenizer across every corpus.

use anyhow::{bail, Context, Result};

use super::{load_corpus, say, write_file};
use crate::config::Config;
use crate::report::{fertility_csv, fertility_markdown, FertilityRow};
use gec_core::tokenize::{fertility, Side, TokenizerSpec};

pub fn run_fertility(config: &Config, quiet: bool) -> Result<()> {
    if config.tokenizers.is_empty() {
        bail!("no tokenizers configured; add a [[tokenizers]] entry");
    }
    let mut rows = Vec::new();
    for tokenizer in &config.tokenizers {
        let path = config.tokenizer_path(tokenizer);
        let spec = TokenizerSpec::from_json_file(&path)
            .with_context(|| format!("loading tokenizer spec {}", path.display()))?;
        for lang in &config.languages {
            for &split in &config.splits {
                let corpus = load_corpus(config, lang, split)?;
                let report = fertility(&spec, &corpus, tokenizer.side).with_context(|| {
                    format!(
                        "tokenizer {:?} on {}/{}",
                        spec.name, lang.code, split
                    )
                })?;
                say!(
                    quiet,
                    "{}/{} × {}: {:.4} tokens/word ({} tokens over {} words)",
                    lang.code,
                    split,
                    spec.name,
                    report.fertility,
                    report.n_subword_tokens,
                    report.n_words
                );
                rows.push(FertilityRow {
                    language: lang.code.clone(),
                    split: split.to_string(),
                    tokenizer: report.tokenizer_name,
                    side: side_name(tokenizer.side).to_string(),
                    n_words: report.n_words,
                    n_subword_tokens: report.n_subword_tokens,
                    fertility: report.fertility,
                });
            }
        }
    }

    let dir = config.out_dir().join("fertility");
    write_file(&dir.join("fertility.csv"), &fertility_csv(&rows))?;
    write_file(&dir.join("fertility.md"), &fertility_markdown(&rows))?;
    say!(quiet, "wrote {} fertility rows → {}", rows.len(), dir.display());
    Ok(())
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Source => "source",
        Side::Reference => "reference",
    }
}
