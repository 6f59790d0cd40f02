//! Evaluation report records and their JSON / CSV / Markdown forms.
//!
//! JSON keeps full float precision and is the machine-readable source
//! of truth; CSV and Markdown are 2-decimal views with n-gram and edit
//! scores scaled to 0–100. Compliance stays a 0–1 fraction everywhere,
//! since it reads as a rate rather than a score.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, ensure, Result};
use serde::{Deserialize, Serialize};

use gec_core::metrics::{ComplianceResult, FScoreResult, GleuResult};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// GLEU numbers in a JSON-safe shape: unrealizable n-gram orders are
/// `None` instead of NaN, which JSON cannot round-trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GleuSummary {
    pub score: f64,
    pub per_n_precision: [Option<f64>; 4],
    pub brevity_penalty: f64,
}

impl From<&GleuResult> for GleuSummary {
    fn from(result: &GleuResult) -> Self {
        Self {
            score: result.score,
            per_n_precision: result
                .per_n_precision
                .map(|p| if p.is_nan() { None } else { Some(p) }),
            brevity_penalty: result.brevity_penalty,
        }
    }
}

/// Scores for one system on one language and split.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub language: String,
    pub system: String,
    pub split: String,
    pub n_pairs: usize,
    /// Which GLEU definition produced `gleu.score`; reports with
    /// different variants must never be merged into one table.
    pub gleu_variant: String,
    pub gleu: GleuSummary,
    pub f_beta: FScoreResult,
    /// Mean over sentences of greedy-matching embedding F1.
    pub bertscore_f1: f64,
    /// Name of the embedding provider behind `bertscore_f1`.
    pub embedding: String,
    pub compliance: ComplianceResult,
    pub metadata: ReportMetadata,
}

/// Provenance of a report; never part of score comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub created_unix: u64,
    pub created: String,
    pub hypothesis_file: String,
    /// SHA-256 of the hypothesis file bytes being scored.
    pub hypothesis_sha256: String,
    pub model_id: Option<String>,
    pub template_digest: Option<String>,
}

impl ReportMetadata {
    pub fn now(hypothesis_file: String, hypothesis_sha256: String) -> Self {
        let now = chrono::Utc::now();
        Self {
            created_unix: now.timestamp().max(0) as u64,
            created: now.to_rfc3339(),
            hypothesis_file,
            hypothesis_sha256,
            model_id: None,
            template_digest: None,
        }
    }
}

fn scaled(value: f64) -> String {
    format!("{:.2}", value * 100.0)
}

fn fraction(value: f64) -> String {
    format!("{value:.2}")
}

pub const EVAL_CSV_HEADER: &str =
    "language,system,split,n_pairs,gleu,f_beta,bertscore_f1,compliance";

pub fn eval_csv_row(report: &EvalReport) -> String {
    format!(
        "{},{},{},{},{},{},{},{}",
        report.language,
        report.system,
        report.split,
        report.n_pairs,
        scaled(report.gleu.score),
        scaled(report.f_beta.f_beta),
        scaled(report.bertscore_f1),
        fraction(report.compliance.compliance),
    )
}

pub fn eval_csv(report: &EvalReport) -> String {
    format!("{EVAL_CSV_HEADER}\n{}\n", eval_csv_row(report))
}

pub fn eval_markdown(report: &EvalReport) -> String {
    let mut md = String::new();
    let _ = writeln!(
        md,
        "# {} / {} / {}\n",
        report.language, report.system, report.split
    );
    let _ = writeln!(md, "| Metric | Value |");
    let _ = writeln!(md, "| --- | --- |");
    let _ = writeln!(md, "| Pairs | {} |", report.n_pairs);
    let _ = writeln!(md, "| GLEU | {} |", scaled(report.gleu.score));
    let _ = writeln!(
        md,
        "| F{} (edit level) | {} |",
        trim_beta(report.f_beta.beta),
        scaled(report.f_beta.f_beta)
    );
    let _ = writeln!(md, "| BERTScore F1 | {} |", scaled(report.bertscore_f1));
    let _ = writeln!(
        md,
        "| Identity compliance | {}{} |",
        fraction(report.compliance.compliance),
        if report.compliance.vacuous {
            " (no identity pairs)"
        } else {
            ""
        }
    );
    let per_n: Vec<String> = report
        .gleu
        .per_n_precision
        .iter()
        .map(|p| match p {
            Some(v) => format!("{v:.4}"),
            None => "-".to_string(),
        })
        .collect();
    let _ = writeln!(md, "| GLEU n-gram precisions | {} |", per_n.join(" / "));
    let _ = writeln!(
        md,
        "| Brevity penalty | {:.4} |",
        report.gleu.brevity_penalty
    );
    let _ = writeln!(md);
    let _ = writeln!(
        md,
        "Scores are ×100; compliance is a 0–1 fraction. Variant: `{}`.",
        report.gleu_variant
    );
    let _ = writeln!(
        md,
        "\nHypothesis `{}` (sha256 `{}`), scored {}.",
        report.metadata.hypothesis_file,
        &report.metadata.hypothesis_sha256[..16.min(report.metadata.hypothesis_sha256.len())],
        report.metadata.created,
    );
    md
}

/// "0.5" not "0.50", "1" not "1.00" — β is a label, not a score.
fn trim_beta(beta: f64) -> String {
    format!("{beta}")
}

/// The merged cross-run report.
#[derive(Debug, Serialize, Deserialize)]
pub struct MergedReport {
    pub schema_version: u32,
    pub gleu_variant: String,
    pub created: String,
    pub created_unix: u64,
    pub reports: Vec<EvalReport>,
}

/// Merge per-run reports, enforcing a single GLEU variant and β.
pub fn merge_reports(mut reports: Vec<EvalReport>) -> Result<MergedReport> {
    ensure!(!reports.is_empty(), "no evaluation reports to merge");
    let variants: std::collections::BTreeSet<&str> = reports
        .iter()
        .map(|r| r.gleu_variant.as_str())
        .collect();
    if variants.len() > 1 {
        bail!(
            "refusing to merge reports with different GLEU variants: {}",
            variants.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    let betas: std::collections::BTreeSet<String> = reports
        .iter()
        .map(|r| format!("{}", r.f_beta.beta))
        .collect();
    if betas.len() > 1 {
        bail!(
            "refusing to merge reports with different F-score betas: {}",
            betas.into_iter().collect::<Vec<_>>().join(", ")
        );
    }
    reports.sort_by(|a, b| {
        (&a.language, &a.system, &a.split).cmp(&(&b.language, &b.system, &b.split))
    });
    let now = chrono::Utc::now();
    Ok(MergedReport {
        schema_version: REPORT_SCHEMA_VERSION,
        gleu_variant: reports[0].gleu_variant.clone(),
        created: now.to_rfc3339(),
        created_unix: now.timestamp().max(0) as u64,
        reports,
    })
}

pub fn merged_csv(merged: &MergedReport) -> String {
    let mut csv = String::from(EVAL_CSV_HEADER);
    csv.push('\n');
    for report in &merged.reports {
        csv.push_str(&eval_csv_row(report));
        csv.push('\n');
    }
    csv
}

/// One Markdown table per language; the best value in each score
/// column is bold (ties all bold).
pub fn merged_markdown(merged: &MergedReport) -> String {
    let mut by_language: BTreeMap<&str, Vec<&EvalReport>> = BTreeMap::new();
    for report in &merged.reports {
        by_language
            .entry(report.language.as_str())
            .or_default()
            .push(report);
    }

    let beta_label = merged
        .reports
        .first()
        .map(|r| trim_beta(r.f_beta.beta))
        .unwrap_or_default();

    let mut md = String::from("# Evaluation summary\n\n");
    for (language, rows) in &by_language {
        let _ = writeln!(md, "## {language}\n");
        let _ = writeln!(
            md,
            "| System | Split | GLEU | F{beta_label} | BERTScore | Compliance |"
        );
        let _ = writeln!(md, "| --- | --- | --- | --- | --- | --- |");
        let best = |f: fn(&EvalReport) -> f64| -> f64 {
            rows.iter()
                .map(|r| f(r))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let best_gleu = best(|r| r.gleu.score);
        let best_f = best(|r| r.f_beta.f_beta);
        let best_bert = best(|r| r.bertscore_f1);
        let best_compliance = best(|r| r.compliance.compliance);
        for report in rows {
            let cell = |value: f64, best: f64, text: String| {
                if value == best {
                    format!("**{text}**")
                } else {
                    text
                }
            };
            let _ = writeln!(
                md,
                "| {} | {} | {} | {} | {} | {} |",
                report.system,
                report.split,
                cell(report.gleu.score, best_gleu, scaled(report.gleu.score)),
                cell(report.f_beta.f_beta, best_f, scaled(report.f_beta.f_beta)),
                cell(report.bertscore_f1, best_bert, scaled(report.bertscore_f1)),
                cell(
                    report.compliance.compliance,
                    best_compliance,
                    fraction(report.compliance.compliance)
                ),
            );
        }
        let _ = writeln!(md);
    }
    let _ = writeln!(
        md,
        "Scores are ×100; compliance is a 0–1 fraction. Variant: `{}`. Generated {}.",
        merged.gleu_variant, merged.created
    );
    md
}

/// One fertility measurement, ready for tabulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FertilityRow {
    pub language: String,
    pub split: String,
    pub tokenizer: String,
    pub side: String,
    pub n_words: usize,
    pub n_subword_tokens: usize,
    pub fertility: f64,
}

pub const FERTILITY_CSV_HEADER: &str =
    "language,split,tokenizer,side,n_words,n_subword_tokens,fertility";

pub fn fertility_csv(rows: &[FertilityRow]) -> String {
    let mut csv = String::from(FERTILITY_CSV_HEADER);
    csv.push('\n');
    for row in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{:.4}",
            row.language,
            row.split,
            row.tokenizer,
            row.side,
            row.n_words,
            row.n_subword_tokens,
            row.fertility
        );
    }
    csv
}

pub fn fertility_markdown(rows: &[FertilityRow]) -> String {
    let mut md = String::from("# Subword fertility\n\n");
    md.push_str("| Language | Split | Tokenizer | Side | Words | Subword tokens | Fertility |\n");
    md.push_str("| --- | --- | --- | --- | --- | --- | --- |\n");
    for row in rows {
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} | {:.2} |",
            row.language,
            row.split,
            row.tokenizer,
            row.side,
            row.n_words,
            row.n_subword_tokens,
            row.fertility
        );
    }
    md.push_str("\nFertility = subword tokens per whitespace word; punctuation-only tokens are not words.\n");
    md
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(language: &str, system: &str, gleu: f64, f: f64, bert: f64, comp: f64) -> EvalReport {
        EvalReport {
            schema_version: REPORT_SCHEMA_VERSION,
            language: language.into(),
            system: system.into(),
            split: "test".into(),
            n_pairs: 5,
            gleu_variant: "source-penalized-1to4-corpus-counts".into(),
            gleu: GleuSummary {
                score: gleu,
                per_n_precision: [Some(0.9), Some(0.8), Some(0.7), None],
                brevity_penalty: 1.0,
            },
            f_beta: FScoreResult {
                tp: 3,
                fp: 1,
                fn_: 2,
                precision: 0.75,
                recall: 0.6,
                f_beta: f,
                beta: 0.5,
            },
            bertscore_f1: bert,
            embedding: "hash-64".into(),
            compliance: ComplianceResult {
                compliance: comp,
                n_pairs: 2,
                n_unchanged: 2,
                vacuous: false,
            },
            metadata: ReportMetadata::now("hyp.tsv".into(), "ab12".into()),
        }
    }

    #[test]
    fn json_round_trips_including_nan_orders() {
        let original = report("hi", "zero", 0.8569, 0.71, 0.93, 1.0);
        let json = serde_json::to_string_pretty(&original).unwrap();
        assert!(json.contains("null"), "fourth order must serialize as null");
        let parsed: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.gleu, original.gleu);
        assert_eq!(parsed.f_beta.f_beta, original.f_beta.f_beta);
    }

    #[test]
    fn gleu_summary_maps_nan_to_none() {
        let summary = GleuSummary::from(&GleuResult {
            score: 0.5,
            per_n_precision: [0.5, f64::NAN, 0.25, f64::NAN],
            brevity_penalty: 0.9,
        });
        assert_eq!(
            summary.per_n_precision,
            [Some(0.5), None, Some(0.25), None]
        );
    }

    #[test]
    fn csv_scales_scores_but_not_compliance() {
        let row = eval_csv_row(&report("hi", "zero", 0.8569, 0.71236, 0.93005, 0.875));
        assert_eq!(row, "hi,zero,test,5,85.69,71.24,93.01,0.88");
    }

    #[test]
    fn serde_field_name_for_false_negatives_is_fn() {
        let json = serde_json::to_string(&report("hi", "z", 0.1, 0.1, 0.1, 1.0)).unwrap();
        assert!(json.contains("\"fn\":2"), "{json}");
    }

    #[test]
    fn merged_markdown_bolds_the_best_per_column() {
        let merged = merge_reports(vec![
            report("hi", "zero", 0.80, 0.60, 0.90, 1.0),
            report("hi", "few", 0.85, 0.55, 0.92, 0.5),
        ])
        .unwrap();
        let md = merged_markdown(&merged);
        assert!(md.contains("| few | test | **85.00** |"), "{md}");
        assert!(md.contains("**60.00**"), "{md}");
        assert!(md.contains("**1.00**"), "{md}");
        assert!(!md.contains("**80.00**"), "{md}");
    }

    #[test]
    fn merging_mixed_gleu_variants_is_refused() {
        let mut other = report("hi", "few", 0.8, 0.6, 0.9, 1.0);
        other.gleu_variant = "plain-bleu".into();
        let err =
            merge_reports(vec![report("hi", "zero", 0.8, 0.6, 0.9, 1.0), other]).unwrap_err();
        assert!(err.to_string().contains("GLEU variants"), "{err:#}");
    }

    #[test]
    fn merging_mixed_betas_is_refused() {
        let mut other = report("hi", "few", 0.8, 0.6, 0.9, 1.0);
        other.f_beta.beta = 1.0;
        let err =
            merge_reports(vec![report("hi", "zero", 0.8, 0.6, 0.9, 1.0), other]).unwrap_err();
        assert!(err.to_string().contains("betas"), "{err:#}");
    }

    #[test]
    fn merged_reports_sort_by_language_system_split() {
        let merged = merge_reports(vec![
            report("tam", "b", 0.1, 0.1, 0.1, 1.0),
            report("hi", "b", 0.1, 0.1, 0.1, 1.0),
            report("hi", "a", 0.1, 0.1, 0.1, 1.0),
        ])
        .unwrap();
        let keys: Vec<(String, String)> = merged
            .reports
            .iter()
            .map(|r| (r.language.clone(), r.system.clone()))
            .collect();
        assert_eq!(
            keys,
            [
                ("hi".into(), "a".into()),
                ("hi".into(), "b".into()),
                ("tam".into(), "b".into())
            ]
        );
    }

    #[test]
    fn fertility_tables_render() {
        let rows = vec![FertilityRow {
            language: "hi".into(),
            split: "test".into(),
            tokenizer: "toy".into(),
            side: "source".into(),
            n_words: 9,
            n_subword_tokens: 12,
            fertility: 4.0 / 3.0,
        }];
        let csv = fertility_csv(&rows);
        assert!(csv.contains("hi,test,toy,source,9,12,1.3333"), "{csv}");
        let md = fertility_markdown(&rows);
        assert!(md.contains("| hi | test | toy | source | 9 | 12 | 1.33 |"), "{md}");
    }
}
