//! Edit-level F-beta over exact (span, replacement) matches.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::edits::{EditSet, EditSpan};
use super::{MetricError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FScoreResult {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_beta: f64,
    pub beta: f64,
}

/// Score hypothesis edits against gold edits. An edit counts as a true
/// positive only when (src_start, src_end, replacement) match exactly;
/// matching is multiset-style, so a duplicated hypothesis edit cannot
/// match one gold edit twice.
pub fn f_beta(hyp: &EditSet, gold: &EditSet, beta: f64) -> Result<FScoreResult> {
    if hyp.source_len() != gold.source_len() {
        return Err(MetricError::MismatchedSources {
            hyp: hyp.source_len(),
            gold: gold.source_len(),
        });
    }
    let mut remaining: HashMap<&EditSpan, usize> = HashMap::new();
    for e in gold.edits() {
        *remaining.entry(e).or_insert(0) += 1;
    }
    let mut tp = 0usize;
    for e in hyp.edits() {
        if let Some(count) = remaining.get_mut(e) {
            if *count > 0 {
                *count -= 1;
                tp += 1;
            }
        }
    }
    f_beta_from_counts(tp, hyp.len() - tp, gold.len() - tp, beta)
}

/// The same formula from pre-aggregated counts; used for corpus-level
/// micro-averaging.
pub fn f_beta_from_counts(tp: usize, fp: usize, fn_: usize, beta: f64) -> Result<FScoreResult> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(MetricError::InvalidBeta(beta));
    }
    let precision = if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f_beta = if tp + fp == 0 && tp + fn_ == 0 {
        // neither edits proposed nor edits required
        1.0
    } else if precision + recall == 0.0 {
        0.0
    } else {
        let b2 = beta * beta;
        (1.0 + b2) * precision * recall / (b2 * precision + recall)
    };
    Ok(FScoreResult {
        tp,
        fp,
        fn_,
        precision,
        recall,
        f_beta,
        beta,
    })
}
