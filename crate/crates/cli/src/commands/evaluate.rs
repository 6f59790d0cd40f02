//! `gec evaluate`: score hypothesis files against references with
//! GLEU, edit-level Fβ, embedding-based F1, and identity compliance.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

use super::{hyp_path, load_corpus, manifest_path, read_json, say, write_file, write_json, Filter};
use crate::config::{Config, EmbeddingConfig};
use crate::report::{eval_csv, eval_markdown, EvalReport, GleuSummary, ReportMetadata,
    REPORT_SCHEMA_VERSION};
use gec_core::corpus::{identity_subset, Corpus};
use gec_core::metrics::{
    bertscore, extract_edits, f_beta, f_beta_from_counts, gleu_corpus, identity_compliance,
    ComplianceResult, EmbeddingProvider, FScoreResult, GleuResult, HashEmbedder, HttpEmbedder,
    GLEU_VARIANT,
};
use gec_core::tokenize::word_tokenize;

/// All per-run scores, independent of any file layout.
#[derive(Debug, Clone)]
pub struct RunScores {
    pub gleu: GleuResult,
    pub f_beta: FScoreResult,
    pub bertscore_f1: f64,
    pub compliance: ComplianceResult,
}

/// Score one run: `outputs` maps sentence id → hypothesis text and
/// must cover every pair in the corpus.
///
/// - GLEU is corpus-level: n-gram counts are pooled over sentences
///   before any ratio is taken.
/// - Fβ is micro-averaged: edit true/false positives are summed over
///   sentences, then combined once.
/// - The embedding F1 is the unweighted mean of per-sentence scores.
pub fn score_run(
    corpus: &Corpus,
    outputs: &BTreeMap<String, String>,
    beta: f64,
    embedder: &dyn EmbeddingProvider,
) -> Result<RunScores> {
    for pair in corpus.iter() {
        if !outputs.contains_key(&pair.id) {
            bail!("no hypothesis for sentence {:?}", pair.id);
        }
    }

    let language = &corpus.language;
    let mut gleu_items = Vec::with_capacity(corpus.len());
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    let mut bert_sum = 0.0f64;
    for pair in corpus.iter() {
        let hypothesis = &outputs[&pair.id];
        let source = word_tokenize(&pair.source, language);
        let hyp = word_tokenize(hypothesis, language);
        let reference = word_tokenize(&pair.reference, language);

        let hyp_edits = extract_edits(&source, &hyp);
        let gold_edits = extract_edits(&source, &reference);
        let counts = f_beta(&hyp_edits, &gold_edits, beta)?;
        tp += counts.tp;
        fp += counts.fp;
        fn_ += counts.fn_;

        bert_sum += sentence_bertscore(&hyp.tokens, &reference.tokens, embedder)?;

        gleu_items.push((source, hyp, reference));
    }

    let gleu = gleu_corpus(&gleu_items)?;
    let f = f_beta_from_counts(tp, fp, fn_, beta)?;
    let compliance = identity_compliance(&identity_subset(corpus), outputs)?;
    Ok(RunScores {
        gleu,
        f_beta: f,
        bertscore_f1: bert_sum / corpus.len() as f64,
        compliance,
    })
}

/// Greedy-matching embedding F1 for one sentence pair. Token lists are
/// embedded as-is (duplicates included, uniform weights). An empty
/// token list cannot be embedded: two empty sides agree perfectly, one
/// empty side is a total miss.
fn sentence_bertscore(
    hyp_tokens: &[String],
    ref_tokens: &[String],
    embedder: &dyn EmbeddingProvider,
) -> Result<f64> {
    match (hyp_tokens.is_empty(), ref_tokens.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        (false, false) => {}
    }
    let hyp = embedder.embed(hyp_tokens)?;
    let reference = embedder.embed(ref_tokens)?;
    Ok(bertscore(&hyp, &reference, None)?.f1)
}

fn build_embedder(config: &Config) -> Box<dyn EmbeddingProvider> {
    match &config.metrics.embedding {
        EmbeddingConfig::Hash { dim } => Box::new(HashEmbedder::new(*dim)),
        EmbeddingConfig::Http { name, url, dim } => {
            Box::new(HttpEmbedder::new(name.clone(), url.clone(), *dim))
        }
    }
}

/// Parse a three-column hypothesis TSV into id → hypothesis.
fn read_hypotheses(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading hypotheses {} (run `gec correct` first?)", path.display()))?;
    let mut outputs = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            bail!(
                "{}:{}: expected 3 tab-separated fields, found {}",
                path.display(),
                i + 1,
                fields.len()
            );
        }
        if outputs
            .insert(fields[0].to_string(), fields[2].to_string())
            .is_some()
        {
            bail!("{}:{}: duplicate id {:?}", path.display(), i + 1, fields[0]);
        }
    }
    Ok(outputs)
}

pub fn run_evaluate(config: &Config, filter: &Filter, quiet: bool) -> Result<()> {
    let embedder = build_embedder(config);
    let systems = filter.systems(config)?;
    if systems.is_empty() {
        bail!("no systems configured; add a [[systems]] entry");
    }
    for system in systems {
        for lang in filter.languages(config)? {
            for split in filter.splits(config)? {
                let corpus = load_corpus(config, lang, split)?;
                let hyp = hyp_path(config, &lang.code, &system.name, split);
                let outputs = read_hypotheses(&hyp)?;
                let scores = score_run(&corpus, &outputs, config.metrics.beta, embedder.as_ref())?;

                let hyp_bytes = std::fs::read(&hyp)?;
                let mut metadata = ReportMetadata::now(
                    hyp.display().to_string(),
                    hex::encode(Sha256::digest(&hyp_bytes)),
                );
                // The manifest is optional context: evaluation works on
                // any well-formed hypothesis file.
                let manifest = manifest_path(config, &lang.code, &system.name, split);
                if manifest.is_file() {
                    let manifest: super::RunManifest = read_json(&manifest)?;
                    metadata.model_id = Some(manifest.model_id);
                    metadata.template_digest = Some(manifest.template_digest);
                }

                let report = EvalReport {
                    schema_version: REPORT_SCHEMA_VERSION,
                    language: lang.code.clone(),
                    system: system.name.clone(),
                    split: split.to_string(),
                    n_pairs: corpus.len(),
                    gleu_variant: GLEU_VARIANT.to_string(),
                    gleu: GleuSummary::from(&scores.gleu),
                    f_beta: scores.f_beta.clone(),
                    bertscore_f1: scores.bertscore_f1,
                    embedding: embedder.name(),
                    compliance: scores.compliance.clone(),
                    metadata,
                };

                let stem = super::run_stem(&lang.code, &system.name, split);
                let eval_dir = config.out_dir().join("eval");
                write_json(&eval_dir.join(format!("{stem}.json")), &report)?;
                write_file(&eval_dir.join(format!("{stem}.csv")), &eval_csv(&report))?;
                write_file(&eval_dir.join(format!("{stem}.md")), &eval_markdown(&report))?;

                say!(
                    quiet,
                    "{}/{} × {}: GLEU {:.2}, F{} {:.2}, BERTScore {:.2}, compliance {:.2}",
                    lang.code,
                    split,
                    system.name,
                    report.gleu.score * 100.0,
                    report.f_beta.beta,
                    report.f_beta.f_beta * 100.0,
                    report.bertscore_f1 * 100.0,
                    report.compliance.compliance
                );
            }
        }
    }
    Ok(())
}
