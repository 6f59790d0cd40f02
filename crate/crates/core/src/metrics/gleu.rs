//! Source-penalized GLEU over 1–4 grams, single reference.
//!
//! Per order n, the numerator is the hypothesis/reference n-gram overlap
//! minus the overlap the hypothesis retains with the *source* beyond
//! what the reference licenses, clamped at zero; the denominator is the
//! hypothesis n-gram count. Corpus scores sum the per-sentence counts
//! before taking ratios — they are not means of sentence scores.
//!
//! Smoothing: orders with a zero denominator (hypothesis shorter than n)
//! are excluded from the geometric mean; orders with a positive
//! denominator but zero numerator get add-one smoothing on both sides of
//! the ratio. Note this makes a k-fold duplicated corpus score differ
//! from the single score exactly when smoothing fires (1/(k·d+1) vs
//! 1/(d+1)); duplication invariance holds whenever every realizable
//! order has a positive numerator.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{MetricError, Result};
use crate::tokenize::TokenSequence;

/// Variant label recorded in every report so scores are only compared
/// within-variant.
pub const GLEU_VARIANT: &str = "source-penalized-1to4-corpus-counts";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GleuResult {
    pub score: f64,
    /// Smoothed precision per order; NaN for orders the hypothesis is
    /// too short to realize.
    pub per_n_precision: [f64; 4],
    /// 0.0 is a sentinel for an empty hypothesis (score is 0 there).
    pub brevity_penalty: f64,
}

#[derive(Debug, Default, Clone, Copy)]
struct Totals {
    num: [u64; 4],
    den: [u64; 4],
    hyp_len: u64,
    ref_len: u64,
}

fn window_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if n <= tokens.len() {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn accumulate(totals: &mut Totals, s: &[String], h: &[String], r: &[String]) {
    for n in 1..=4usize {
        let ch = window_counts(h, n);
        let cr = window_counts(r, n);
        let cs = window_counts(s, n);
        let mut overlap = 0u64;
        let mut penalty = 0u64;
        // grams absent from the hypothesis contribute nothing
        for (gram, &hc) in &ch {
            let rc = cr.get(gram).copied().unwrap_or(0);
            let sc = cs.get(gram).copied().unwrap_or(0);
            overlap += hc.min(rc);
            penalty += hc.min(sc).saturating_sub(hc.min(rc));
        }
        totals.num[n - 1] += overlap.saturating_sub(penalty);
        totals.den[n - 1] += (h.len() as u64 + 1).saturating_sub(n as u64);
    }
    totals.hyp_len += h.len() as u64;
    totals.ref_len += r.len() as u64;
}

fn finish(totals: &Totals) -> GleuResult {
    if totals.hyp_len == 0 {
        return GleuResult {
            score: 0.0,
            per_n_precision: [f64::NAN; 4],
            brevity_penalty: 0.0,
        };
    }
    let mut per_n = [f64::NAN; 4];
    let mut log_sum = 0.0;
    let mut orders = 0usize;
    for n in 0..4 {
        if totals.den[n] == 0 {
            continue;
        }
        let p = if totals.num[n] == 0 {
            1.0 / (totals.den[n] as f64 + 1.0)
        } else {
            totals.num[n] as f64 / totals.den[n] as f64
        };
        per_n[n] = p;
        log_sum += p.ln();
        orders += 1;
    }
    let brevity_penalty = if totals.hyp_len >= totals.ref_len {
        1.0
    } else {
        (1.0 - totals.ref_len as f64 / totals.hyp_len as f64).exp()
    };
    let score = if orders == 0 {
        0.0
    } else {
        brevity_penalty * (log_sum / orders as f64).exp()
    };
    GleuResult {
        score,
        per_n_precision: per_n,
        brevity_penalty,
    }
}

pub fn gleu_sentence(
    source: &TokenSequence,
    hypothesis: &TokenSequence,
    reference: &TokenSequence,
) -> Result<GleuResult> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let mut totals = Totals::default();
    accumulate(
        &mut totals,
        &source.tokens,
        &hypothesis.tokens,
        &reference.tokens,
    );
    Ok(finish(&totals))
}

/// Corpus-level score: numerators, denominators, and lengths are summed
/// across items before any ratio is taken.
pub fn gleu_corpus(
    items: &[(TokenSequence, TokenSequence, TokenSequence)],
) -> Result<GleuResult> {
    if items.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let mut totals = Totals::default();
    for (s, h, r) in items {
        if r.is_empty() {
            return Err(MetricError::EmptyReference);
        }
        accumulate(&mut totals, &s.tokens, &h.tokens, &r.tokens);
    }
    Ok(finish(&totals))
}
