//! Identity compliance: on pairs whose reference equals the source, did
//! the system leave the input untouched?

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MetricError, Result};
use crate::corpus::Corpus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceResult {
    /// Fraction of identity pairs returned unchanged, in [0, 1].
    pub compliance: f64,
    pub n_pairs: usize,
    pub n_unchanged: usize,
    /// True when the subset was empty and the 1.0 is vacuous.
    pub vacuous: bool,
}

/// `subset` must contain only identity pairs (see
/// [`Corpus::identity_subset`]); `outputs` maps pair id to the system's
/// corrected text. Outputs are compared to sources after whitespace
/// trimming on both sides.
pub fn identity_compliance(
    subset: &Corpus,
    outputs: &BTreeMap<String, String>,
) -> Result<ComplianceResult> {
    let mut n_unchanged = 0usize;
    for pair in subset.iter() {
        if !pair.is_identity() {
            return Err(MetricError::NotIdentityPair {
                id: pair.id.clone(),
            });
        }
        let output = outputs.get(&pair.id).ok_or(MetricError::MissingOutput {
            id: pair.id.clone(),
        })?;
        if output.trim() == pair.source.trim() {
            n_unchanged += 1;
        }
    }
    let n_pairs = subset.len();
    Ok(ComplianceResult {
        compliance: if n_pairs == 0 {
            1.0
        } else {
            n_unchanged as f64 / n_pairs as f64
        },
        n_pairs,
        n_unchanged,
        vacuous: n_pairs == 0,
    })
}
