//! Word error rate via Levenshtein alignment with a counted edit script.
//!
//! The rate is `(substitutions + insertions + deletions) / reference_len`.
//! Deletions are reference tokens missing from the hypothesis; insertions
//! are extra hypothesis tokens. When several alignments tie, backtrace
//! prefers substitution, then deletion, then insertion.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WerBreakdown {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    pub reference_len: usize,
}

impl WerBreakdown {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    pub fn rate(&self) -> f64 {
        self.errors() as f64 / self.reference_len as f64
    }
}

/// Aligns `hypothesis` against `reference` and counts the edit operations.
/// The reference must be non-empty so the rate is well defined.
pub fn wer<T: PartialEq>(hypothesis: &[T], reference: &[T]) -> Result<WerBreakdown> {
    if reference.is_empty() {
        return Err(Error::usage("reference must contain at least one token"));
    }
    let n = reference.len();
    let m = hypothesis.len();
    // cost[i][j]: edits aligning reference[..i] with hypothesis[..j].
    let width = m + 1;
    let mut cost = vec![0usize; (n + 1) * width];
    for i in 0..=n {
        cost[i * width] = i;
    }
    for j in 0..=m {
        cost[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let same = reference[i - 1] == hypothesis[j - 1];
            let diag = cost[(i - 1) * width + j - 1] + usize::from(!same);
            let del = cost[(i - 1) * width + j] + 1;
            let ins = cost[i * width + j - 1] + 1;
            cost[i * width + j] = diag.min(del).min(ins);
        }
    }
    let mut subs = 0;
    let mut dels = 0;
    let mut inss = 0;
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * width + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            if cost[(i - 1) * width + j - 1] + usize::from(!same) == here {
                if !same {
                    subs += 1;
                }
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && cost[(i - 1) * width + j] + 1 == here {
            dels += 1;
            i -= 1;
            continue;
        }
        inss += 1;
        j -= 1;
    }
    Ok(WerBreakdown {
        substitutions: subs,
        insertions: inss,
        deletions: dels,
        reference_len: n,
    })
}
