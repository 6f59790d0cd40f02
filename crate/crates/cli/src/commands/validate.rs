//! `gec validate`: prove the whole configuration is runnable before
//! any credential is needed — corpora load, tokenizer specs parse,
//! exemplar sources exist and have enough rows.

use anyhow::{Context, Result};

use super::{load_corpus, say};
use crate::config::{Config, ExemplarConfig};
use gec_core::corpus::{stats, Split};
use gec_core::prompting::{select_exemplars, ExemplarSource};
use gec_core::tokenize::TokenizerSpec;

pub fn run_validate(config: &Config, quiet: bool) -> Result<()> {
    let mut corpora = 0usize;
    for lang in &config.languages {
        for &split in &config.splits {
            let corpus = load_corpus(config, lang, split)?;
            let s = stats(&corpus)?;
            say!(
                quiet,
                "{}/{}: {} pairs ({} identity), mean {:.1} words per source",
                lang.code,
                split,
                s.n_pairs,
                s.n_identity,
                s.mean_source_words
            );
            corpora += 1;
        }
    }

    for tokenizer in &config.tokenizers {
        let path = config.tokenizer_path(tokenizer);
        let spec = TokenizerSpec::from_json_file(&path)
            .with_context(|| format!("loading tokenizer spec {}", path.display()))?;
        say!(
            quiet,
            "tokenizer {:?}: {:?}, {} vocab entries, {} merges",
            spec.name,
            spec.kind,
            spec.vocab_size(),
            spec.merges().len()
        );
    }

    // Exemplar sources must be usable for every selected language; a
    // missing train split or a short curated file should surface now,
    // not mid-run.
    for system in &config.systems {
        let Some(exemplars) = &system.exemplars else {
            continue;
        };
        for lang in &config.languages {
            match exemplars {
                ExemplarConfig::Random { k, seed } => {
                    let train = load_corpus(config, lang, Split::Train).with_context(|| {
                        format!(
                            "system {:?} draws random exemplars; language {:?} needs a train split",
                            system.name, lang.code
                        )
                    })?;
                    select_exemplars(
                        &train,
                        *k,
                        ExemplarSource::RandomSeeded {
                            seed: seed.unwrap_or(config.seed),
                        },
                    )
                    .with_context(|| {
                        format!("system {:?}, language {:?}", system.name, lang.code)
                    })?;
                }
                ExemplarConfig::Curated { k, path } => {
                    let resolved = config.curated_path(path, &lang.code);
                    let dummy = load_corpus(config, lang, config.splits[0])?;
                    select_exemplars(&dummy, *k, ExemplarSource::CuratedFile { path: &resolved })
                        .with_context(|| {
                            format!("system {:?}, language {:?}", system.name, lang.code)
                        })?;
                }
            }
        }
    }

    say!(
        quiet,
        "configuration valid: {} languages, {} splits, {} corpora, {} systems, {} tokenizers",
        config.languages.len(),
        config.splits.len(),
        corpora,
        config.systems.len(),
        config.tokenizers.len()
    );
    Ok(())
}
