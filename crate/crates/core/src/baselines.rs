//! Reference combination strategies: edit-level majority voting,
//! sentence-level weighted voting, and minimum-Bayes-risk selection.

use std::collections::HashMap;

use thiserror::Error;

use crate::alignment::{apply_edits, levenshtein, Edit};
use crate::candidates::{Candidate, CandidateSet};
use crate::combiner::{nms, ScoredCandidate};

/// Settings for [`edit_majority_vote`].
#[derive(Debug, Clone, Default)]
pub struct VoteConfig {
    /// Minimum number of proposing systems for an edit to survive.
    pub min_votes: usize,
    /// Systems whose votes count; `None` means all of them.
    pub system_subset: Option<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VoteError {
    #[error("invalid voting configuration: {reason}")]
    BadConfig { reason: String },
}

fn bad(reason: impl Into<String>) -> VoteError {
    VoteError::BadConfig { reason: reason.into() }
}

/// Applies every edit at least `min_votes` systems agree on.
///
/// Votes are counted within `system_subset` when one is given. Surviving
/// edits that still conflict are resolved greedily by agreement count, with
/// the same tie-break and conflict rules the score-based pipeline uses, so
/// the chosen set is always applicable.
pub fn edit_majority_vote(set: &CandidateSet, cfg: &VoteConfig) -> Result<Vec<String>, VoteError> {
    if cfg.min_votes == 0 || cfg.min_votes > set.systems {
        return Err(bad(format!(
            "min_votes {} must lie in 1..={}",
            cfg.min_votes, set.systems
        )));
    }
    if let Some(subset) = &cfg.system_subset {
        if subset.is_empty() {
            return Err(bad("system subset must not be empty"));
        }
        if let Some(&out) = subset.iter().find(|&&s| s >= set.systems) {
            return Err(bad(format!("subset system {out} out of range for {} systems", set.systems)));
        }
    }

    let counted: Vec<ScoredCandidate> = set
        .candidates
        .iter()
        .filter_map(|c| {
            let proposed_by: std::collections::BTreeSet<usize> = match &cfg.system_subset {
                Some(subset) => c.proposed_by.iter().copied().filter(|s| subset.contains(s)).collect(),
                None => c.proposed_by.clone(),
            };
            let votes = proposed_by.len();
            if votes < cfg.min_votes {
                return None;
            }
            // Vote count doubles as the selection score; the restricted
            // proposer set keeps the agreement tie-break consistent with it.
            Some(ScoredCandidate {
                candidate: Candidate { edit: c.edit.clone(), proposed_by },
                p_raw: votes as f64,
                p_adj: votes as f64,
            })
        })
        .collect();

    let selected: Vec<Edit> = nms(counted, 0.0)
        .into_iter()
        .map(|s| s.candidate.edit)
        .collect();
    Ok(apply_edits(&set.source_tokens, &selected)
        .expect("suppression at theta 0 leaves an applicable set"))
}

/// Picks the hypothesis string with the greatest total weight.
///
/// Systems producing token-identical output pool their weights. Ties go to
/// the group containing the lowest system index.
pub fn weighted_sentence_vote(
    hypotheses: &[Vec<String>],
    weights: &[f64],
) -> Result<Vec<String>, VoteError> {
    if hypotheses.is_empty() {
        return Err(bad("no hypotheses to vote over"));
    }
    if weights.len() != hypotheses.len() {
        return Err(bad(format!(
            "{} weights for {} systems",
            weights.len(),
            hypotheses.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(bad("weights must be finite and non-negative"));
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(bad("weights must not all be zero"));
    }

    // Group key is the exact token sequence; value is (total weight, lowest
    // contributing system index).
    let mut groups: HashMap<&[String], (f64, usize)> = HashMap::new();
    for (index, hyp) in hypotheses.iter().enumerate() {
        let entry = groups.entry(hyp.as_slice()).or_insert((0.0, index));
        entry.0 += weights[index];
    }
    let (&winner, _) = groups
        .iter()
        .max_by(|(_, (wa, ia)), (_, (wb, ib))| {
            wa.total_cmp(wb).then_with(|| ib.cmp(ia))
        })
        .expect("at least one hypothesis");
    Ok(winner.to_vec())
}

/// Normalized token-level similarity in [0, 1]; 1 means identical.
pub fn sentence_similarity(a: &[String], b: &[String]) -> f64 {
    let denom = a.len().max(b.len()).max(1);
    1.0 - levenshtein(a, b) as f64 / denom as f64
}

/// Minimum-Bayes-risk selection: the hypothesis most similar on average to
/// all the others wins; ties go to the lowest index.
pub fn mbr_select(hypotheses: &[Vec<String>]) -> Result<Vec<String>, VoteError> {
    if hypotheses.is_empty() {
        return Err(bad("no hypotheses to select from"));
    }
    let k = hypotheses.len();
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for i in 0..k {
        let score = if k == 1 {
            1.0
        } else {
            let total: f64 = (0..k)
                .filter(|&j| j != i)
                .map(|j| sentence_similarity(&hypotheses[i], &hypotheses[j]))
                .sum();
            total / (k - 1) as f64
        };
        if score.total_cmp(&best_score) == std::cmp::Ordering::Greater {
            best = i;
            best_score = score;
        }
    }
    Ok(hypotheses[best].clone())
}
