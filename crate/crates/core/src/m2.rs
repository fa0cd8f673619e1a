//! Reading and writing the M2 annotation format.
//!
//! An M2 file is a sequence of blank-line-separated blocks. Each block has
//! one `S` line with the whitespace-tokenized source sentence and zero or
//! more `A` lines:
//!
//! ```text
//! A start end|||type|||correction|||REQUIRED|||-NONE-|||annotator
//! ```
//!
//! Spans use 0-based token offsets with exclusive ends. A block may carry
//! several annotators; an annotator with no edits is recorded with a single
//! `noop` line (span `-1 -1`, correction `-NONE-`).

use std::collections::BTreeMap;

use thiserror::Error;

use crate::alignment::{Edit, EditType};

/// One `A` line: span, the type label as written in the file, and the
/// correction string (empty when the file says `-NONE-`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEdit {
    pub start: usize,
    pub end: usize,
    pub raw_type: String,
    pub correction: String,
}

impl RawEdit {
    /// Maps the raw edit to a span [`Edit`], deriving the canonical type
    /// from the shape and dropping the file's type label.
    pub fn to_edit(&self) -> Result<Edit, M2Error> {
        Edit::new(self.start, self.end, self.correction.clone()).map_err(|_| M2Error::NoOpEdit {
            start: self.start,
            end: self.end,
        })
    }

    /// Canonical single-letter type for the span shape, as used when
    /// serializing: `M` for insertions, `U` for deletions, `R` otherwise.
    pub fn unified_type(&self) -> Result<EditType, M2Error> {
        self.to_edit().map(|e| e.etype())
    }
}

/// All edits one annotator proposed for a sentence, sorted by span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub annotator_id: usize,
    pub edits: Vec<RawEdit>,
}

/// One sentence block: the tokenized source plus its annotations, ordered
/// by annotator id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct M2Sentence {
    pub source_tokens: Vec<String>,
    pub annotations: Vec<Annotation>,
}

impl M2Sentence {
    /// Annotation for `annotator_id`, if present.
    pub fn annotation(&self, annotator_id: usize) -> Option<&Annotation> {
        self.annotations.iter().find(|a| a.annotator_id == annotator_id)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum M2Error {
    #[error("line {line}: expected an S line starting a sentence block, got: {text}")]
    ExpectedSource { line: usize, text: String },
    #[error("line {line}: A line before any S line")]
    EditBeforeSource { line: usize },
    #[error("line {line}: expected 6 |||-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: bad span \"{text}\": {reason}")]
    BadSpan { line: usize, text: String, reason: String },
    #[error("line {line}: bad annotator id \"{text}\"")]
    BadAnnotator { line: usize, text: String },
    #[error("line {line}: edit span {start}..{end} out of range for {len} source tokens")]
    SpanOutOfRange { line: usize, start: usize, end: usize, len: usize },
    #[error("edit at {start}..{end} has an empty span and empty correction")]
    NoOpEdit { start: usize, end: usize },
}

fn parse_span(text: &str, line: usize) -> Result<Option<(usize, usize)>, M2Error> {
    let mut parts = text.split_whitespace();
    let (a, b) = match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => (a, b),
        _ => {
            return Err(M2Error::BadSpan {
                line,
                text: text.to_owned(),
                reason: "need exactly two offsets".into(),
            })
        }
    };
    if a == "-1" && b == "-1" {
        return Ok(None);
    }
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| M2Error::BadSpan {
            line,
            text: text.to_owned(),
            reason: format!("\"{s}\" is not a token offset"),
        })
    };
    let (start, end) = (parse(a)?, parse(b)?);
    if start > end {
        return Err(M2Error::BadSpan {
            line,
            text: text.to_owned(),
            reason: format!("start {start} exceeds end {end}"),
        });
    }
    Ok(Some((start, end)))
}

/// Parses M2 text into sentence blocks.
///
/// Accepts both explicit `noop` lines and annotators that simply do not
/// appear; the latter are only represented if some other block line names
/// them. Offsets are validated against the source length. Within an
/// annotation, edits are sorted by `(start, end)`; annotations are sorted
/// by annotator id.
pub fn parse_m2(text: &str) -> Result<Vec<M2Sentence>, M2Error> {
    let mut sentences = Vec::new();
    let mut source: Option<Vec<String>> = None;
    // BTreeMap keeps annotator order deterministic regardless of file order.
    let mut pending: BTreeMap<usize, Vec<RawEdit>> = BTreeMap::new();

    let finish = |source: &mut Option<Vec<String>>,
                      pending: &mut BTreeMap<usize, Vec<RawEdit>>,
                      sentences: &mut Vec<M2Sentence>| {
        if let Some(tokens) = source.take() {
            let mut annotations: Vec<Annotation> = std::mem::take(pending)
                .into_iter()
                .map(|(annotator_id, mut edits)| {
                    edits.sort_by_key(|e| (e.start, e.end));
                    Annotation { annotator_id, edits }
                })
                .collect();
            if annotations.is_empty() {
                annotations.push(Annotation { annotator_id: 0, edits: Vec::new() });
            }
            sentences.push(M2Sentence { source_tokens: tokens, annotations });
        }
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw_line.trim_end();
        if trimmed.is_empty() {
            finish(&mut source, &mut pending, &mut sentences);
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("S ").or(if trimmed == "S" { Some("") } else { None }) {
            if source.is_some() {
                // Two S lines without a separating blank: treat as a new block.
                finish(&mut source, &mut pending, &mut sentences);
            }
            source = Some(rest.split_whitespace().map(str::to_owned).collect());
            continue;
        }
        let Some(rest) = trimmed.strip_prefix("A ") else {
            return Err(M2Error::ExpectedSource { line, text: trimmed.to_owned() });
        };
        let Some(tokens) = source.as_ref() else {
            return Err(M2Error::EditBeforeSource { line });
        };

        let fields: Vec<&str> = rest.split("|||").collect();
        if fields.len() != 6 {
            return Err(M2Error::FieldCount { line, found: fields.len() });
        }
        let annotator_id: usize = fields[5]
            .trim()
            .parse()
            .map_err(|_| M2Error::BadAnnotator { line, text: fields[5].to_owned() })?;
        let raw_type = fields[1].to_owned();
        let span = parse_span(fields[0], line)?;
        let is_noop = raw_type == "noop" || span.is_none();
        let entry = pending.entry(annotator_id).or_default();
        if is_noop {
            // Registers the annotator with no edits.
            continue;
        }
        let (start, end) = span.expect("non-noop span");
        if end > tokens.len() {
            return Err(M2Error::SpanOutOfRange { line, start, end, len: tokens.len() });
        }
        let correction = if fields[2] == "-NONE-" { String::new() } else { fields[2].to_owned() };
        entry.push(RawEdit { start, end, raw_type, correction });
    }
    finish(&mut source, &mut pending, &mut sentences);
    Ok(sentences)
}

/// Renders sentence blocks back to M2 text.
///
/// Annotators without edits get an explicit `noop` line so the information
/// survives a round trip. Corrections that are empty in memory serialize as
/// `-NONE-`. An empty sentence list yields the empty string.
pub fn serialize_m2(sentences: &[M2Sentence]) -> String {
    let mut out = String::new();
    for sentence in sentences {
        out.push('S');
        for token in &sentence.source_tokens {
            out.push(' ');
            out.push_str(token);
        }
        out.push('\n');
        for annotation in &sentence.annotations {
            if annotation.edits.is_empty() {
                out.push_str(&format!(
                    "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||{}\n",
                    annotation.annotator_id
                ));
                continue;
            }
            for edit in &annotation.edits {
                let correction = if edit.correction.is_empty() { "-NONE-" } else { &edit.correction };
                out.push_str(&format!(
                    "A {} {}|||{}|||{}|||REQUIRED|||-NONE-|||{}\n",
                    edit.start, edit.end, edit.raw_type, correction, annotation.annotator_id
                ));
            }
        }
        out.push('\n');
    }
    out
}

/// Converts one annotation to span edits with canonical types.
pub fn annotation_edits(annotation: &Annotation) -> Result<Vec<Edit>, M2Error> {
    annotation.edits.iter().map(RawEdit::to_edit).collect()
}

/// Rewrites the type label to the canonical single letter for the span
/// shape. Exotic labels (merge, split, insert_after, ...) all collapse this
/// way because any such annotation is expressible as a span replacement.
pub fn unify_edit_types(edit: &RawEdit) -> Result<RawEdit, M2Error> {
    let unified = edit.unified_type()?;
    Ok(RawEdit { raw_type: unified.as_str().to_owned(), ..edit.clone() })
}
