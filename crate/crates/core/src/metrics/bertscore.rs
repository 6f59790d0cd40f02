//! Greedy embedding-matching score over cosine similarity.
//!
//! Scores are raw cosines with no baseline rescaling, so values for
//! close texts sit near 1.0. Bitwise-identical rows are scored exactly
//! 1.0 before any arithmetic, which keeps the identical-matrices case
//! exact instead of within-rounding.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{MetricError, Result};

/// Rows with an L2 norm at or below this are rejected as zero vectors;
/// the comparison is written so NaN-poisoned rows fail it too.
const MIN_NORM: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BertScoreResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Optional idf weighting: one weight per hypothesis row for precision,
/// one per reference row for recall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfWeights {
    pub hypothesis: Vec<f64>,
    pub reference: Vec<f64>,
}

fn row_norms(matrix: &Array2<f64>, side: &'static str) -> Result<Vec<f64>> {
    let mut norms = Vec::with_capacity(matrix.nrows());
    for (row, v) in matrix.rows().into_iter().enumerate() {
        let norm = v.dot(&v).sqrt();
        if !(norm > MIN_NORM) {
            return Err(MetricError::ZeroNormRow { side, row });
        }
        norms.push(norm);
    }
    Ok(norms)
}

fn check_weights(weights: &[f64], rows: usize, side: &'static str) -> Result<()> {
    if weights.len() != rows {
        return Err(MetricError::WeightLength {
            side,
            got: weights.len(),
            rows,
        });
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || !(sum > 0.0) {
        return Err(MetricError::InvalidWeights);
    }
    Ok(())
}

fn weighted_mean(values: &[f64], weights: Option<&[f64]>) -> f64 {
    match weights {
        None => values.iter().sum::<f64>() / values.len() as f64,
        Some(w) => {
            let total: f64 = w.iter().sum();
            values.iter().zip(w).map(|(v, wi)| v * wi).sum::<f64>() / total
        }
    }
}

/// Precision is the (weighted) mean over hypothesis rows of the best
/// cosine against any reference row; recall mirrors it over reference
/// rows. F1 is their harmonic mean, 0 when precision + recall is not
/// positive.
pub fn bertscore(
    hyp: &Array2<f64>,
    reference: &Array2<f64>,
    idf: Option<&IdfWeights>,
) -> Result<BertScoreResult> {
    if hyp.nrows() == 0 {
        return Err(MetricError::EmptyEmbeddings { side: "hypothesis" });
    }
    if reference.nrows() == 0 {
        return Err(MetricError::EmptyEmbeddings { side: "reference" });
    }
    if hyp.ncols() != reference.ncols() {
        return Err(MetricError::DimensionMismatch {
            hyp: hyp.ncols(),
            reference: reference.ncols(),
        });
    }
    let hyp_norms = row_norms(hyp, "hypothesis")?;
    let ref_norms = row_norms(reference, "reference")?;
    if let Some(w) = idf {
        check_weights(&w.hypothesis, hyp.nrows(), "hypothesis")?;
        check_weights(&w.reference, reference.nrows(), "reference")?;
    }

    let mut sim = Array2::<f64>::zeros((hyp.nrows(), reference.nrows()));
    for (i, hrow) in hyp.rows().into_iter().enumerate() {
        for (j, rrow) in reference.rows().into_iter().enumerate() {
            sim[(i, j)] = if hrow == rrow {
                1.0
            } else {
                (hrow.dot(&rrow) / (hyp_norms[i] * ref_norms[j])).clamp(-1.0, 1.0)
            };
        }
    }

    let row_max: Vec<f64> = (0..hyp.nrows())
        .map(|i| {
            (0..reference.nrows())
                .map(|j| sim[(i, j)])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let col_max: Vec<f64> = (0..reference.nrows())
        .map(|j| {
            (0..hyp.nrows())
                .map(|i| sim[(i, j)])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let precision = weighted_mean(&row_max, idf.map(|w| w.hypothesis.as_slice()));
    let recall = weighted_mean(&col_max, idf.map(|w| w.reference.as_slice()));
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(BertScoreResult {
        precision,
        recall,
        f1,
    })
}
