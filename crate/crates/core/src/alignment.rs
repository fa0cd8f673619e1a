//! Token alignment and span edits.
//!
//! A hypothesis is related to its source sentence by a list of [`Edit`]s:
//! span replacements `(start, end, replacement)` over source token indices.
//! [`extract_edits`] derives the canonical edit list from a unit-cost
//! alignment; [`apply_edits`] rewrites a source with a compatible edit set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The three canonical edit kinds.
///
/// `Missing` inserts tokens (zero-width span), `Replacement` substitutes the
/// covered span, `Unnecessary` deletes it (empty replacement). The kind is
/// fully determined by the span shape and replacement, so [`Edit`] derives it
/// instead of storing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EditType {
    #[serde(rename = "M")]
    Missing,
    #[serde(rename = "R")]
    Replacement,
    #[serde(rename = "U")]
    Unnecessary,
}

impl EditType {
    pub fn as_str(&self) -> &'static str {
        match self {
            EditType::Missing => "M",
            EditType::Replacement => "R",
            EditType::Unnecessary => "U",
        }
    }
}

impl std::fmt::Display for EditType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EditError {
    #[error("edit span {start}..{end} is inverted")]
    InvertedSpan { start: usize, end: usize },
    #[error("no-op edit at {pos}..{pos}: insertion needs a non-empty replacement")]
    NoOp { pos: usize },
}

/// A span replacement on a token sequence.
///
/// `start == end` marks an insertion point (replacement goes before source
/// token `start`); an empty replacement deletes the span. The constructor
/// rejects the inconsistent corner (`start == end` with empty replacement),
/// so every `Edit` has a well-defined [`EditType`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edit {
    start: usize,
    end: usize,
    replacement: String,
}

impl Edit {
    pub fn new(start: usize, end: usize, replacement: impl Into<String>) -> Result<Self, EditError> {
        let replacement = replacement.into();
        if start > end {
            return Err(EditError::InvertedSpan { start, end });
        }
        if start == end && replacement.is_empty() {
            return Err(EditError::NoOp { pos: start });
        }
        Ok(Edit { start, end, replacement })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    /// Replacement tokens joined by single spaces; empty for a deletion.
    pub fn replacement(&self) -> &str {
        &self.replacement
    }

    pub fn replacement_tokens(&self) -> impl Iterator<Item = &str> {
        self.replacement.split_whitespace()
    }

    pub fn etype(&self) -> EditType {
        if self.start == self.end {
            EditType::Missing
        } else if self.replacement.is_empty() {
            EditType::Unnecessary
        } else {
            EditType::Replacement
        }
    }

    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    /// Source tokens covered by the span.
    pub fn span_len(&self) -> usize {
        self.end - self.start
    }
}

impl std::fmt::Display for Edit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, \"{}\")", self.start, self.end, self.replacement)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApplyError {
    #[error("edit span {start}..{end} is out of range for {len} tokens")]
    OutOfRange { start: usize, end: usize, len: usize },
    #[error("edits are not sorted by (start, end): {prev} precedes {cur}")]
    Unsorted { prev: Edit, cur: Edit },
    #[error("conflicting edits {first} and {second}")]
    Conflict { first: Edit, second: Edit },
}

/// Rewrites `source` left-to-right with a sorted, mutually compatible edit set.
///
/// Insertions at position `p` place their tokens before source token `p`.
/// Compatible means: spans do not overlap, at most one insertion per
/// position, and no insertion strictly inside another edit's span. An
/// insertion at a span boundary is fine.
pub fn apply_edits(source: &[String], edits: &[Edit]) -> Result<Vec<String>, ApplyError> {
    let len = source.len();
    for pair in edits.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        if (cur.start, cur.end) < (prev.start, prev.end) {
            return Err(ApplyError::Unsorted { prev: prev.clone(), cur: cur.clone() });
        }
        // Sorted by (start, end), so overlap with any earlier edit shows up
        // against the immediate predecessor.
        let double_insert = prev.is_insertion() && cur.is_insertion() && prev.start == cur.start;
        if prev.end > cur.start || double_insert {
            return Err(ApplyError::Conflict { first: prev.clone(), second: cur.clone() });
        }
    }

    let mut out = Vec::with_capacity(len);
    let mut cursor = 0usize;
    for edit in edits {
        if edit.end > len {
            return Err(ApplyError::OutOfRange { start: edit.start, end: edit.end, len });
        }
        out.extend(source[cursor..edit.start].iter().cloned());
        out.extend(edit.replacement_tokens().map(str::to_owned));
        cursor = edit.end;
    }
    out.extend(source[cursor..].iter().cloned());
    Ok(out)
}

/// Unit-cost token Levenshtein distance.
pub fn levenshtein(a: &[String], b: &[String]) -> usize {
    let (n, m) = (a.len(), b.len());
    let mut row: Vec<usize> = (0..=n).collect();
    for j in 1..=m {
        let mut diag = row[0];
        row[0] = j;
        for i in 1..=n {
            let up = row[i];
            row[i] = if a[i - 1] == b[j - 1] {
                diag
            } else {
                1 + diag.min(up).min(row[i - 1])
            };
            diag = up;
        }
    }
    row[n]
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// Extracts the canonical edit list turning `source` into `hypothesis`.
///
/// Built on an optimal unit-cost alignment (match 0; substitute, insert,
/// delete 1) with a fixed tie-break so the output is byte-stable. Maximal
/// runs of adjacent non-match operations collapse into one edit, so a
/// single edit may cover several tokens. The result is sorted by
/// `(start, end)`, non-overlapping, and `apply_edits(source, result)`
/// reproduces `hypothesis` exactly.
pub fn extract_edits(source: &[String], hypothesis: &[String]) -> Vec<Edit> {
    let (n, m) = (source.len(), hypothesis.len());

    // Full DP table for the backtrace; sentence-scale inputs keep it small.
    let width = m + 1;
    let mut dist = vec![0u32; (n + 1) * width];
    for j in 0..=m {
        dist[j] = j as u32;
    }
    for i in 1..=n {
        dist[i * width] = i as u32;
        for j in 1..=m {
            let sub = dist[(i - 1) * width + (j - 1)]
                + if source[i - 1] == hypothesis[j - 1] { 0 } else { 1 };
            let del = dist[(i - 1) * width + j] + 1;
            let ins = dist[i * width + (j - 1)] + 1;
            dist[i * width + j] = sub.min(del).min(ins);
        }
    }

    // Backtrace preferring match > substitute > delete > insert on ties.
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dist[i * width + j];
        if i > 0 && j > 0 && source[i - 1] == hypothesis[j - 1] && here == dist[(i - 1) * width + (j - 1)] {
            ops.push(Op::Match);
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && here == dist[(i - 1) * width + (j - 1)] + 1 {
            ops.push(Op::Substitute);
            i -= 1;
            j -= 1;
        } else if i > 0 && here == dist[(i - 1) * width + j] + 1 {
            ops.push(Op::Delete);
            i -= 1;
        } else {
            ops.push(Op::Insert);
            j -= 1;
        }
    }
    ops.reverse();

    // Collapse maximal non-match runs into single span edits.
    let mut edits = Vec::new();
    let (mut si, mut hj) = (0usize, 0usize);
    let mut run_start: Option<usize> = None;
    let mut run_tokens: Vec<&str> = Vec::new();
    let flush = |start: &mut Option<usize>, end: usize, tokens: &mut Vec<&str>, edits: &mut Vec<Edit>| {
        if let Some(a) = start.take() {
            let edit = Edit::new(a, end, tokens.join(" "))
                .expect("non-empty run yields a valid edit");
            edits.push(edit);
            tokens.clear();
        }
    };
    for op in ops {
        match op {
            Op::Match => {
                flush(&mut run_start, si, &mut run_tokens, &mut edits);
                si += 1;
                hj += 1;
            }
            Op::Substitute => {
                run_start.get_or_insert(si);
                run_tokens.push(&hypothesis[hj]);
                si += 1;
                hj += 1;
            }
            Op::Delete => {
                run_start.get_or_insert(si);
                si += 1;
            }
            Op::Insert => {
                run_start.get_or_insert(si);
                run_tokens.push(&hypothesis[hj]);
                hj += 1;
            }
        }
    }
    flush(&mut run_start, si, &mut run_tokens, &mut edits);
    edits
}

#[cfg(test)]
pub(crate) fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}
