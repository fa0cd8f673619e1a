//! Candidate selection pipeline: score, boost, filter, suppress, apply.
//!
//! Pooled candidates are scored by the classifier, boosted by cross-system
//! agreement, gated by a raw and an adjusted threshold, and the survivors go
//! through greedy non-maximum suppression over 1-D spans before the winners
//! rewrite the source sentence.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{apply_edits, ApplyError, Edit};
use crate::candidates::{aggregate, encode, Candidate, CandidateSet};
use crate::classifier::{LinearModel, ModelError};

fn default_tau() -> f64 {
    0.7
}
fn default_alpha() -> f64 {
    0.9
}
fn default_beta() -> f64 {
    0.1
}
fn default_cap() -> f64 {
    1.5
}

/// Thresholds and boost settings for the selection pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombineConfig {
    /// Main threshold on the raw probability, in (0, 1).
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Relaxed scale in (0, 1]: the adjusted score must reach `alpha * tau`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Agreement boost factor, >= 0.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Upper bound on the boost multiplier, > 0.
    #[serde(default = "default_cap")]
    pub cap: f64,
    /// Span-overlap tolerance in [0, 1]; 0 treats any overlap as a conflict.
    #[serde(default)]
    pub iou_theta: f64,
}

impl Default for CombineConfig {
    fn default() -> Self {
        CombineConfig {
            tau: default_tau(),
            alpha: default_alpha(),
            beta: default_beta(),
            cap: default_cap(),
            iou_theta: 0.0,
        }
    }
}

impl CombineConfig {
    pub fn validate(&self) -> Result<(), CombineError> {
        let bad = |what: &str| Err(CombineError::BadConfig { reason: what.to_owned() });
        if !(self.tau.is_finite() && 0.0 < self.tau && self.tau < 1.0) {
            return bad("tau must lie in (0, 1)");
        }
        if !(self.alpha.is_finite() && 0.0 < self.alpha && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad("beta must be non-negative");
        }
        if !(self.cap.is_finite() && self.cap > 0.0) {
            return bad("cap must be positive");
        }
        if !(self.iou_theta.is_finite() && (0.0..=1.0).contains(&self.iou_theta)) {
            return bad("iou_theta must lie in [0, 1]");
        }
        Ok(())
    }
}

/// A candidate with its classifier probability and agreement-adjusted score.
///
/// `p_adj` is stored unclipped and may exceed 1 when the boost binds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    pub p_raw: f64,
    pub p_adj: f64,
}

/// Agreement-boosted score: `p_raw * min(1 + beta * (n - 1), cap)`.
///
/// A candidate only one system proposed (n = 1) keeps its raw score as long
/// as `cap >= 1`.
pub fn boost(p_raw: f64, n: usize, beta: f64, cap: f64) -> f64 {
    debug_assert!(n >= 1, "agreement count must be at least 1");
    p_raw * (1.0 + beta * (n as f64 - 1.0)).min(cap)
}

/// Keeps candidates passing both gates: `p_raw >= tau` and `p_adj >= alpha * tau`.
pub fn dual_filter(scored: Vec<ScoredCandidate>, tau: f64, alpha: f64) -> Vec<ScoredCandidate> {
    scored
        .into_iter()
        .filter(|s| s.p_raw >= tau && s.p_adj >= alpha * tau)
        .collect()
}

/// 1-D intersection-over-union of two span edits.
///
/// The 0/0 case of two insertions is defined as 1 at equal positions and 0
/// otherwise. An insertion against a non-empty span is always 0; enclosure
/// of an insertion is handled by a separate conflict rule, not by IoU.
pub fn iou(e1: &Edit, e2: &Edit) -> f64 {
    let inter = e1
        .end()
        .min(e2.end())
        .saturating_sub(e1.start().max(e2.start()));
    let union = e1.span_len() + e2.span_len() - inter;
    if union == 0 {
        return if e1.start() == e2.start() { 1.0 } else { 0.0 };
    }
    inter as f64 / union as f64
}

fn insertion_inside_span(ins: &Edit, span: &Edit) -> bool {
    ins.is_insertion()
        && !span.is_insertion()
        && span.start() < ins.start()
        && ins.start() < span.end()
}

/// Whether two candidates cannot both be selected.
///
/// True when their IoU exceeds `theta`, when both insert at the same
/// position (regardless of `theta`), or when one is an insertion strictly
/// inside the other's span. The last rule is symmetric: whichever of the
/// pair is selected first blocks the other, so the surviving set stays
/// applicable in left-to-right order.
pub fn edits_conflict(e1: &Edit, e2: &Edit, theta: f64) -> bool {
    if e1.is_insertion() && e2.is_insertion() && e1.start() == e2.start() {
        return true;
    }
    if iou(e1, e2) > theta {
        return true;
    }
    insertion_inside_span(e1, e2) || insertion_inside_span(e2, e1)
}

/// Why a candidate survived or fell out of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceDecision {
    Kept,
    /// Raw probability below `tau`.
    RawBelowTau,
    /// Adjusted score below `alpha * tau`.
    AdjBelowAlphaTau,
    /// Span overlap (IoU above `theta`) with a higher-priority selection.
    OverlapSuppressed,
    /// A higher-priority insertion already took this position.
    InsertPositionTaken,
    /// Insertion strictly inside a selected span, or span strictly
    /// containing a selected insertion.
    InsertSpanConflict,
}

impl TraceDecision {
    pub fn kept(&self) -> bool {
        matches!(self, TraceDecision::Kept)
    }

    pub fn reason(&self) -> &'static str {
        match self {
            TraceDecision::Kept => "kept",
            TraceDecision::RawBelowTau => "raw-below-tau",
            TraceDecision::AdjBelowAlphaTau => "adjusted-below-alpha-tau",
            TraceDecision::OverlapSuppressed => "overlap-suppressed",
            TraceDecision::InsertPositionTaken => "insert-position-taken",
            TraceDecision::InsertSpanConflict => "insert-span-conflict",
        }
    }
}

/// Per-candidate record of the pipeline's verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct EditTrace {
    pub edit: Edit,
    pub proposed_by: BTreeSet<usize>,
    pub p_raw: f64,
    pub p_adj: f64,
    pub decision: TraceDecision,
}

#[derive(Debug, Error)]
pub enum CombineError {
    #[error("invalid combine configuration: {reason}")]
    BadConfig { reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("selected edits cannot be applied: {0}")]
    Apply(#[from] ApplyError),
    #[error("sentence {index}: {cause}")]
    Sentence { index: usize, cause: Box<CombineError> },
}

/// Selection order: adjusted score descending, then agreement descending,
/// then span start, replacement, and span end ascending. Total over
/// distinct candidates, so selection is deterministic.
fn selection_order(x: &ScoredCandidate, y: &ScoredCandidate) -> std::cmp::Ordering {
    y.p_adj
        .total_cmp(&x.p_adj)
        .then_with(|| y.candidate.agreement().cmp(&x.candidate.agreement()))
        .then_with(|| x.candidate.edit.start().cmp(&y.candidate.edit.start()))
        .then_with(|| x.candidate.edit.replacement().cmp(y.candidate.edit.replacement()))
        .then_with(|| x.candidate.edit.end().cmp(&y.candidate.edit.end()))
}

fn nms_with_outcomes(scored: &[ScoredCandidate], theta: f64) -> Vec<TraceDecision> {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&i, &j| selection_order(&scored[i], &scored[j]));

    let mut outcome = vec![TraceDecision::Kept; scored.len()];
    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let edit = &scored[i].candidate.edit;
        let mut verdict = TraceDecision::Kept;
        for &j in &kept {
            let other = &scored[j].candidate.edit;
            if edit.is_insertion() && other.is_insertion() && edit.start() == other.start() {
                verdict = TraceDecision::InsertPositionTaken;
            } else if iou(edit, other) > theta {
                verdict = TraceDecision::OverlapSuppressed;
            } else if insertion_inside_span(edit, other) || insertion_inside_span(other, edit) {
                verdict = TraceDecision::InsertSpanConflict;
            } else {
                continue;
            }
            break;
        }
        outcome[i] = verdict;
        if verdict == TraceDecision::Kept {
            kept.push(i);
        }
    }
    outcome
}

/// Greedy non-maximum suppression over 1-D spans.
///
/// Candidates are visited in selection order; one is kept iff it does not
/// conflict (see [`edits_conflict`]) with anything already kept. The result
/// is re-sorted by `(start, end)` for application.
pub fn nms(scored: Vec<ScoredCandidate>, theta: f64) -> Vec<ScoredCandidate> {
    let outcomes = nms_with_outcomes(&scored, theta);
    let mut kept: Vec<ScoredCandidate> = scored
        .into_iter()
        .zip(outcomes)
        .filter(|(_, o)| o.kept())
        .map(|(s, _)| s)
        .collect();
    kept.sort_by(|x, y| {
        (x.candidate.edit.start(), x.candidate.edit.end())
            .cmp(&(y.candidate.edit.start(), y.candidate.edit.end()))
    });
    kept
}

/// Scores every candidate in `set` and attaches the boosted value.
pub fn score_candidates(
    set: &CandidateSet,
    model: &LinearModel,
    cfg: &CombineConfig,
) -> Result<Vec<ScoredCandidate>, ModelError> {
    set.candidates
        .iter()
        .map(|c| {
            let p_raw = model.score(&encode(c, set.systems))?;
            let p_adj = boost(p_raw, c.agreement(), cfg.beta, cfg.cap);
            Ok(ScoredCandidate { candidate: c.clone(), p_raw, p_adj })
        })
        .collect()
}

/// Runs the full pipeline on one sentence and reports every candidate's fate.
///
/// Returns the corrected tokens and one trace entry per pooled candidate, in
/// span order. With no candidates the output is the source unchanged.
pub fn combine_sentence_traced(
    source: &[String],
    hypotheses: &[Vec<String>],
    model: &LinearModel,
    cfg: &CombineConfig,
) -> Result<(Vec<String>, Vec<EditTrace>), CombineError> {
    cfg.validate()?;
    let set = aggregate(source, hypotheses);
    let scored = score_candidates(&set, model, cfg)?;

    let mut decisions = vec![TraceDecision::Kept; scored.len()];
    let mut survivors: Vec<usize> = Vec::new();
    for (i, s) in scored.iter().enumerate() {
        if s.p_raw < cfg.tau {
            decisions[i] = TraceDecision::RawBelowTau;
        } else if s.p_adj < cfg.alpha * cfg.tau {
            decisions[i] = TraceDecision::AdjBelowAlphaTau;
        } else {
            survivors.push(i);
        }
    }

    let surviving: Vec<ScoredCandidate> = survivors.iter().map(|&i| scored[i].clone()).collect();
    let outcomes = nms_with_outcomes(&surviving, cfg.iou_theta);
    for (&i, outcome) in survivors.iter().zip(&outcomes) {
        decisions[i] = *outcome;
    }

    let selected: Vec<Edit> = scored
        .iter()
        .zip(&decisions)
        .filter(|(_, d)| d.kept())
        .map(|(s, _)| s.candidate.edit.clone())
        .collect();
    // Candidates are span-sorted, so the kept subset already is.
    let output = apply_edits(source, &selected)?;

    let trace = scored
        .into_iter()
        .zip(decisions)
        .map(|(s, decision)| EditTrace {
            edit: s.candidate.edit,
            proposed_by: s.candidate.proposed_by,
            p_raw: s.p_raw,
            p_adj: s.p_adj,
            decision,
        })
        .collect();
    Ok((output, trace))
}

/// [`combine_sentence_traced`] without the trace.
pub fn combine_sentence(
    source: &[String],
    hypotheses: &[Vec<String>],
    model: &LinearModel,
    cfg: &CombineConfig,
) -> Result<Vec<String>, CombineError> {
    combine_sentence_traced(source, hypotheses, model, cfg).map(|(output, _)| output)
}

/// Combines every sentence of a corpus in parallel, preserving order.
///
/// `hypotheses[i]` holds the k system outputs for `sources[i]`. Errors carry
/// the failing sentence index.
pub fn combine_corpus(
    sources: &[Vec<String>],
    hypotheses: &[Vec<Vec<String>>],
    model: &LinearModel,
    cfg: &CombineConfig,
) -> Result<Vec<Vec<String>>, CombineError> {
    assert_eq!(sources.len(), hypotheses.len(), "one hypothesis set per source");
    sources
        .par_iter()
        .zip(hypotheses.par_iter())
        .enumerate()
        .map(|(index, (source, hyps))| {
            combine_sentence(source, hyps, model, cfg)
                .map_err(|cause| CombineError::Sentence { index, cause: Box::new(cause) })
        })
        .collect()
}
