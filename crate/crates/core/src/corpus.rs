//! File-level plumbing: token-line corpora and sentence-aligned loading.
//!
//! All corpus files are UTF-8 with one sentence per line and tokens
//! separated by whitespace. The loaders validate the sentence alignment
//! between sources, hypothesis files, and gold annotations up front so the
//! pipeline can assume parallel corpora.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::alignment::Edit;
use crate::m2::{annotation_edits, parse_m2, M2Error, M2Sentence};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path} has {found} sentences, expected {expected}")]
    LineCount { path: PathBuf, expected: usize, found: usize },
    #[error("{path}: {cause}")]
    M2 { path: PathBuf, cause: M2Error },
    #[error("{path}: sentence {index} does not match the source corpus")]
    SourceMismatch { path: PathBuf, index: usize },
    #[error("{path}: sentence {index}: {cause}")]
    BadGoldEdit { path: PathBuf, index: usize, cause: M2Error },
}

/// One annotator's converted gold edits for a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldAnnotation {
    pub annotator_id: usize,
    pub edits: Vec<Edit>,
}

/// The per-sentence unit of corpus I/O: source, the k system outputs, and
/// gold annotations when a reference file was given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceRecord {
    pub source: Vec<String>,
    pub hypotheses: Vec<Vec<String>>,
    pub gold: Option<Vec<GoldAnnotation>>,
}

/// Reads a one-sentence-per-line token file. Blank lines become empty
/// sentences; a trailing newline does not add one.
pub fn read_token_lines(path: &Path) -> Result<Vec<Vec<String>>, CorpusError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Read { path: path.to_owned(), source })?;
    Ok(text
        .lines()
        .map(|line| line.split_whitespace().map(str::to_owned).collect())
        .collect())
}

pub fn join_tokens(tokens: &[String]) -> String {
    tokens.join(" ")
}

/// Writes sentences as token lines, one per line, with a trailing newline.
pub fn write_token_lines(path: &Path, sentences: &[Vec<String>]) -> Result<(), CorpusError> {
    let mut text = String::new();
    for sentence in sentences {
        text.push_str(&join_tokens(sentence));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| CorpusError::Write { path: path.to_owned(), source })
}

/// Loads k hypothesis files and regroups them per sentence.
///
/// Every file must have exactly `expected` sentences; the result has one
/// entry per sentence holding the k system outputs in file order.
pub fn load_hypothesis_files(
    paths: &[PathBuf],
    expected: usize,
) -> Result<Vec<Vec<Vec<String>>>, CorpusError> {
    let mut per_system = Vec::with_capacity(paths.len());
    for path in paths {
        let sentences = read_token_lines(path)?;
        if sentences.len() != expected {
            return Err(CorpusError::LineCount {
                path: path.clone(),
                expected,
                found: sentences.len(),
            });
        }
        per_system.push(sentences);
    }
    let mut per_sentence = vec![Vec::with_capacity(paths.len()); expected];
    for sentences in per_system {
        for (i, sentence) in sentences.into_iter().enumerate() {
            per_sentence[i].push(sentence);
        }
    }
    Ok(per_sentence)
}

/// Loads a gold M2 file and checks it is sentence-aligned with `sources`:
/// same sentence count, token-identical S lines.
pub fn load_gold_m2(path: &Path, sources: &[Vec<String>]) -> Result<Vec<M2Sentence>, CorpusError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Read { path: path.to_owned(), source })?;
    let sentences =
        parse_m2(&text).map_err(|cause| CorpusError::M2 { path: path.to_owned(), cause })?;
    if sentences.len() != sources.len() {
        return Err(CorpusError::LineCount {
            path: path.to_owned(),
            expected: sources.len(),
            found: sentences.len(),
        });
    }
    for (index, (sentence, source)) in sentences.iter().zip(sources).enumerate() {
        if &sentence.source_tokens != source {
            return Err(CorpusError::SourceMismatch { path: path.to_owned(), index });
        }
    }
    Ok(sentences)
}

/// Loads a sentence-aligned corpus into per-sentence records.
///
/// Hypothesis files must match the source line count; the optional gold M2
/// file must match the source tokens sentence by sentence. Gold edits are
/// converted to canonical span edits per annotator.
pub fn load_sentence_records(
    source_path: &Path,
    hypothesis_paths: &[PathBuf],
    gold_path: Option<&Path>,
) -> Result<Vec<SentenceRecord>, CorpusError> {
    let sources = read_token_lines(source_path)?;
    let hypotheses = load_hypothesis_files(hypothesis_paths, sources.len())?;
    let gold = match gold_path {
        None => None,
        Some(path) => {
            let sentences = load_gold_m2(path, &sources)?;
            let converted: Vec<Vec<GoldAnnotation>> = sentences
                .iter()
                .enumerate()
                .map(|(index, sentence)| {
                    sentence
                        .annotations
                        .iter()
                        .map(|annotation| {
                            annotation_edits(annotation)
                                .map(|edits| GoldAnnotation {
                                    annotator_id: annotation.annotator_id,
                                    edits,
                                })
                                .map_err(|cause| CorpusError::BadGoldEdit {
                                    path: path.to_owned(),
                                    index,
                                    cause,
                                })
                        })
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            Some(converted)
        }
    };
    Ok(sources
        .into_iter()
        .zip(hypotheses)
        .enumerate()
        .map(|(i, (source, hypotheses))| SentenceRecord {
            source,
            hypotheses,
            gold: gold.as_ref().map(|g| g[i].clone()),
        })
        .collect())
}
