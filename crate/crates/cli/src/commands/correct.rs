//! `gec correct`: run each selected system over each selected corpus
//! and write hypothesis files plus a manifest tying every hypothesis
//! back to its exact request.

use std::collections::BTreeMap;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use super::{hyp_path, load_corpus, manifest_path, say, write_file, write_json, Filter};
use crate::config::{Config, ExemplarConfig, LanguageConfig, SystemConfig};
use gec_core::corpus::{Corpus, Split};
use gec_core::prompting::{
    correct_corpus, render, select_exemplars, BatchOptions, Cache, ExemplarSet, ExemplarSource,
    HttpChatClient, PromptTemplate, Provenance, RetryPolicy,
};

/// Written next to each hypothesis file; records exactly how the
/// hypotheses were produced.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub language: String,
    pub system: String,
    pub split: String,
    pub provider: String,
    pub model_id: String,
    pub template: String,
    pub template_digest: String,
    pub temperature: f64,
    pub exemplars: Option<ExemplarSummary>,
    pub n_pairs: usize,
    pub n_from_cache: usize,
    pub created_unix: u64,
    pub created: String,
    /// Sentence id → response cache key, for auditing cached runs.
    pub cache_keys: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExemplarSummary {
    pub provenance: Provenance,
    pub k: usize,
    pub seed: Option<u64>,
}

pub fn run_correct(config: &Config, filter: &Filter, quiet: bool) -> Result<()> {
    let systems = filter.systems(config)?;
    if systems.is_empty() {
        bail!("no systems configured; add a [[systems]] entry");
    }
    for system in systems {
        let preset = config.provider(&system.provider)?;
        let client = HttpChatClient::new(preset.clone())?;
        let template = PromptTemplate::preset(&system.template)
            .with_context(|| format!("unknown template {:?}", system.template))?;
        let cache = Cache::new(config.cache_dir())?;
        for lang in filter.languages(config)? {
            for split in filter.splits(config)? {
                run_one(
                    config, system, &template, &client, &cache, lang, split, quiet,
                )?;
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    config: &Config,
    system: &SystemConfig,
    template: &PromptTemplate,
    client: &HttpChatClient,
    cache: &Cache,
    lang: &LanguageConfig,
    split: Split,
    quiet: bool,
) -> Result<()> {
    let corpus = load_corpus(config, lang, split)?;
    let exemplars = build_exemplars(config, system, lang, &corpus)?;
    let options = BatchOptions {
        model_id: system.model_id.clone(),
        temperature: system.temperature,
        retry: RetryPolicy::default(),
        parallelism: config.parallelism,
        failure_threshold: config.failure_threshold,
    };
    let outcome = correct_corpus(
        &corpus,
        template,
        exemplars.as_ref(),
        client,
        cache,
        &options,
    )
    .with_context(|| {
        format!(
            "correcting {}/{} with system {:?}",
            lang.code, split, system.name
        )
    })?;
    for (id, error) in &outcome.failures {
        eprintln!("warning: {id}: {error}");
    }

    // Hypothesis TSV in corpus order: id, source, hypothesis.
    let mut tsv = String::new();
    let mut cache_keys = BTreeMap::new();
    for pair in corpus.pairs() {
        let Some(response) = outcome.responses.get(&pair.id) else {
            continue;
        };
        // A tab inside a hypothesis would corrupt the column structure.
        let hypothesis = response.normalized_text.replace('\t', " ");
        tsv.push_str(&format!("{}\t{}\t{}\n", pair.id, pair.source, hypothesis));
        let bundle = render(
            template,
            &corpus.language,
            exemplars.as_ref(),
            &pair.source,
            &system.model_id,
            system.temperature,
        )?;
        cache_keys.insert(pair.id.clone(), bundle.cache_key());
    }
    let hyp = hyp_path(config, &lang.code, &system.name, split);
    write_file(&hyp, &tsv)?;

    let now = chrono::Utc::now();
    let n_from_cache = outcome.responses.values().filter(|r| r.from_cache).count();
    let manifest = RunManifest {
        schema_version: 1,
        language: lang.code.clone(),
        system: system.name.clone(),
        split: split.to_string(),
        provider: system.provider.clone(),
        model_id: system.model_id.clone(),
        template: template.name.clone(),
        template_digest: template.digest(),
        temperature: system.temperature,
        exemplars: exemplars.as_ref().map(|set| ExemplarSummary {
            provenance: set.provenance,
            k: set.k,
            seed: set.seed,
        }),
        n_pairs: outcome.responses.len(),
        n_from_cache,
        created_unix: now.timestamp().max(0) as u64,
        created: now.to_rfc3339(),
        cache_keys,
    };
    write_json(&manifest_path(config, &lang.code, &system.name, split), &manifest)?;

    say!(
        quiet,
        "{}/{} × {}: {} hypotheses ({} from cache, {} failed) → {}",
        lang.code,
        split,
        system.name,
        outcome.responses.len(),
        n_from_cache,
        outcome.failures.len(),
        hyp.display()
    );
    Ok(())
}

fn build_exemplars(
    config: &Config,
    system: &SystemConfig,
    lang: &LanguageConfig,
    corpus: &Corpus,
) -> Result<Option<ExemplarSet>> {
    let Some(exemplar_config) = &system.exemplars else {
        return Ok(None);
    };
    let set = match exemplar_config {
        ExemplarConfig::Random { k, seed } => {
            let train = load_corpus(config, lang, Split::Train).with_context(|| {
                format!(
                    "system {:?} draws random exemplars from the train split",
                    system.name
                )
            })?;
            select_exemplars(
                &train,
                *k,
                ExemplarSource::RandomSeeded {
                    seed: seed.unwrap_or(config.seed),
                },
            )?
        }
        ExemplarConfig::Curated { k, path } => {
            let resolved = config.curated_path(path, &lang.code);
            // The corpus argument is unused for curated files.
            select_exemplars(corpus, *k, ExemplarSource::CuratedFile { path: &resolved })?
        }
    };
    Ok(Some(set))
}
