//! In-context exemplar selection: seeded random draws from a train
//! split, or a user-curated file loaded verbatim.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PromptError, Result};
use crate::corpus::{Corpus, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Curated,
    RandomSeeded,
}

/// Ordered (erroneous, corrected) pairs plus how they were chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExemplarSet {
    pub exemplars: Vec<(String, String)>,
    pub provenance: Provenance,
    pub seed: Option<u64>,
    pub k: usize,
}

#[derive(Debug, Clone, Copy)]
pub enum ExemplarSource<'a> {
    RandomSeeded { seed: u64 },
    CuratedFile { path: &'a Path },
}

/// Draw `k` exemplars. Random selection samples distinct pairs without
/// replacement from a Train-split corpus, deterministically per seed;
/// curated selection loads a two-column TSV of exactly `k` pairs in
/// file order.
pub fn select_exemplars(train: &Corpus, k: usize, source: ExemplarSource) -> Result<ExemplarSet> {
    match source {
        ExemplarSource::RandomSeeded { seed } => {
            if train.split != Split::Train {
                return Err(PromptError::NotTrainSplit {
                    split: train.split.to_string(),
                });
            }
            if train.len() < k {
                return Err(PromptError::TrainTooSmall {
                    train: train.len(),
                    k,
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pairs = train.pairs();
            let exemplars = rand::seq::index::sample(&mut rng, pairs.len(), k)
                .into_iter()
                .map(|i| (pairs[i].source.clone(), pairs[i].reference.clone()))
                .collect();
            Ok(ExemplarSet {
                exemplars,
                provenance: Provenance::RandomSeeded,
                seed: Some(seed),
                k,
            })
        }
        ExemplarSource::CuratedFile { path } => {
            let file_err = |message: String| PromptError::CuratedFile {
                path: path.display().to_string(),
                message,
            };
            let text =
                std::fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
            let mut exemplars = Vec::new();
            for (i, line) in text.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let mut fields = line.split('\t');
                let (Some(err_text), Some(corrected), None) =
                    (fields.next(), fields.next(), fields.next())
                else {
                    return Err(file_err(format!("line {}: expected 2 fields", i + 1)));
                };
                if err_text.trim().is_empty() || corrected.trim().is_empty() {
                    return Err(file_err(format!("line {}: empty field", i + 1)));
                }
                exemplars.push((err_text.to_string(), corrected.to_string()));
            }
            if exemplars.len() != k {
                return Err(PromptError::CuratedCount {
                    path: path.display().to_string(),
                    expected: k,
                    found: exemplars.len(),
                });
            }
            Ok(ExemplarSet {
                exemplars,
                provenance: Provenance::Curated,
                seed: None,
                k,
            })
        }
    }
}
