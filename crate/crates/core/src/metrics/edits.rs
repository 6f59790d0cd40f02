//! Span-edit extraction by minimal-cost token alignment.
//!
//! Costs: match 0, deletion 1, insertion 1, substitution 1 plus a small
//! tie-break term (1 − character-overlap)/10 that prefers visually
//! similar substitutions without ever changing the minimal edit count
//! (the term stays below any full unit of cost). Traceback resolves
//! remaining ties in the fixed order diagonal, then delete, then
//! insert, which yields the earliest possible src_start; contiguous
//! non-match runs merge into one [`EditSpan`].

use serde::{Deserialize, Serialize};

use super::{MetricError, Result};
use crate::tokenize::TokenSequence;

/// Cost-equality tolerance during traceback; all genuine ties differ by
/// orders of magnitude more than accumulated f64 rounding.
const TIE_EPS: f64 = 1e-9;

/// One correction: replace source tokens [src_start, src_end) with
/// `replacement`. Pure insertions have src_start == src_end; pure
/// deletions have an empty replacement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EditSpan {
    pub src_start: usize,
    pub src_end: usize,
    pub replacement: Vec<String>,
}

/// Sorted, non-overlapping edits against one source of known length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditSet {
    source_len: usize,
    edits: Vec<EditSpan>,
}

impl EditSet {
    pub fn new(source_len: usize, edits: Vec<EditSpan>) -> Result<Self> {
        let invalid = |message: String| Err(MetricError::InvalidEditSet(message));
        for e in &edits {
            if e.src_start > e.src_end || e.src_end > source_len {
                return invalid(format!(
                    "span {}..{} out of order or beyond source length {}",
                    e.src_start, e.src_end, source_len
                ));
            }
            if e.src_start == e.src_end && e.replacement.is_empty() {
                return invalid(format!("null edit at {}", e.src_start));
            }
        }
        for pair in edits.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if (b.src_start, b.src_end) < (a.src_start, a.src_end) {
                return invalid("spans not sorted by (src_start, src_end)".into());
            }
            if b.src_start < a.src_end {
                return invalid(format!(
                    "spans {}..{} and {}..{} overlap",
                    a.src_start, a.src_end, b.src_start, b.src_end
                ));
            }
            if a.src_start == b.src_start && a.src_end == b.src_end {
                // two insertions at one point have no defined order
                return invalid(format!(
                    "duplicate insertion point at {}",
                    a.src_start
                ));
            }
        }
        Ok(Self { source_len, edits })
    }

    pub fn empty(source_len: usize) -> Self {
        Self {
            source_len,
            edits: Vec::new(),
        }
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn edits(&self) -> &[EditSpan] {
        &self.edits
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// Apply all edits to `source`, right to left so earlier spans keep
    /// their indices.
    pub fn apply(&self, source: &[String]) -> Result<Vec<String>> {
        if source.len() != self.source_len {
            return Err(MetricError::WrongSourceLength {
                expected: self.source_len,
                found: source.len(),
            });
        }
        let mut out = source.to_vec();
        for e in self.edits.iter().rev() {
            out.splice(e.src_start..e.src_end, e.replacement.iter().cloned());
        }
        Ok(out)
    }
}

/// Dice coefficient over character multisets, in [0, 1].
fn char_overlap(a: &str, b: &str) -> f64 {
    let mut counts = std::collections::HashMap::new();
    let mut len_a = 0usize;
    for c in a.chars() {
        *counts.entry(c).or_insert(0i64) += 1;
        len_a += 1;
    }
    let mut len_b = 0usize;
    let mut shared = 0i64;
    for c in b.chars() {
        len_b += 1;
        if let Some(n) = counts.get_mut(&c) {
            if *n > 0 {
                *n -= 1;
                shared += 1;
            }
        }
    }
    if len_a + len_b == 0 {
        return 1.0;
    }
    2.0 * shared as f64 / (len_a + len_b) as f64
}

fn step_cost(s: &str, t: &str) -> f64 {
    if s == t {
        0.0
    } else {
        1.0 + (1.0 - char_overlap(s, t)) / 10.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Substitute,
    Delete,
    Insert,
}

pub fn extract_edits(source: &TokenSequence, target: &TokenSequence) -> EditSet {
    let s = &source.tokens;
    let t = &target.tokens;
    let (n, m) = (s.len(), t.len());

    let mut dp = vec![vec![0f64; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate().skip(1) {
        row[0] = i as f64;
    }
    for j in 1..=m {
        dp[0][j] = j as f64;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = dp[i - 1][j - 1] + step_cost(&s[i - 1], &t[j - 1]);
            let up = dp[i - 1][j] + 1.0;
            let left = dp[i][j - 1] + 1.0;
            dp[i][j] = diag.min(up).min(left);
        }
    }

    let mut ops = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let cost = step_cost(&s[i - 1], &t[j - 1]);
            if (dp[i][j] - (dp[i - 1][j - 1] + cost)).abs() < TIE_EPS {
                ops.push(if s[i - 1] == t[j - 1] {
                    Op::Match
                } else {
                    Op::Substitute
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && (dp[i][j] - (dp[i - 1][j] + 1.0)).abs() < TIE_EPS {
            ops.push(Op::Delete);
            i -= 1;
        } else {
            ops.push(Op::Insert);
            j -= 1;
        }
    }
    ops.reverse();

    // merge contiguous non-match runs into spans
    let mut edits = Vec::new();
    let (mut si, mut ti) = (0usize, 0usize);
    let mut run: Option<(usize, Vec<String>)> = None;
    for op in ops {
        match op {
            Op::Match => {
                if let Some((start, replacement)) = run.take() {
                    edits.push(EditSpan {
                        src_start: start,
                        src_end: si,
                        replacement,
                    });
                }
                si += 1;
                ti += 1;
            }
            Op::Substitute => {
                run.get_or_insert_with(|| (si, Vec::new()))
                    .1
                    .push(t[ti].clone());
                si += 1;
                ti += 1;
            }
            Op::Delete => {
                run.get_or_insert_with(|| (si, Vec::new()));
                si += 1;
            }
            Op::Insert => {
                run.get_or_insert_with(|| (si, Vec::new()))
                    .1
                    .push(t[ti].clone());
                ti += 1;
            }
        }
    }
    if let Some((start, replacement)) = run.take() {
        edits.push(EditSpan {
            src_start: start,
            src_end: si,
            replacement,
        });
    }
    EditSet::new(n, edits).expect("extracted edits satisfy the span invariants")
}
