//! Pooling edits from several systems into scored candidates.
//!
//! Each hypothesis is reduced to its canonical edit list, edits identical in
//! `(start, end, replacement)` are merged across systems, and every surviving
//! candidate is encoded as a sparse binary feature vector indexed by
//! (system, edit type).

use std::collections::{BTreeMap, BTreeSet};

use crate::alignment::{extract_edits, Edit, EditType};

/// Fixed order of edit types used for feature indexing.
pub const EDIT_TYPES: [EditType; 3] = [EditType::Missing, EditType::Replacement, EditType::Unnecessary];

fn type_index(t: EditType) -> usize {
    match t {
        EditType::Missing => 0,
        EditType::Replacement => 1,
        EditType::Unnecessary => 2,
    }
}

/// One pooled edit plus the set of systems that proposed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub edit: Edit,
    pub proposed_by: BTreeSet<usize>,
}

impl Candidate {
    /// Number of systems proposing this exact edit.
    pub fn agreement(&self) -> usize {
        self.proposed_by.len()
    }
}

/// All candidates for one sentence, sorted by `(start, end, replacement)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    pub source_tokens: Vec<String>,
    pub candidates: Vec<Candidate>,
    /// Number of systems the hypotheses came from.
    pub systems: usize,
}

/// Pools the edit lists of `hypotheses` against `source`.
///
/// Two proposals merge only when start, end, and replacement all match;
/// near-identical edits stay separate candidates and compete later. The
/// output order is the span order of the underlying edits, which makes the
/// set independent of system order up to the `proposed_by` contents.
pub fn aggregate(source: &[String], hypotheses: &[Vec<String>]) -> CandidateSet {
    let mut pool: BTreeMap<Edit, BTreeSet<usize>> = BTreeMap::new();
    for (system, hyp) in hypotheses.iter().enumerate() {
        for edit in extract_edits(source, hyp) {
            pool.entry(edit).or_default().insert(system);
        }
    }
    let candidates = pool
        .into_iter()
        .map(|(edit, proposed_by)| Candidate { edit, proposed_by })
        .collect();
    CandidateSet {
        source_tokens: source.to_vec(),
        candidates,
        systems: hypotheses.len(),
    }
}

/// Binary feature vector over (system, edit type) slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    bits: Vec<bool>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    /// Indices of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        FeatureVector { bits }
    }
}

/// Feature dimension for `k` systems: one slot per (system, type) pair.
pub fn feature_dim(systems: usize) -> usize {
    systems * EDIT_TYPES.len()
}

/// Slot index for system `system` proposing an edit of type `etype`.
pub fn feature_index(system: usize, etype: EditType) -> usize {
    system * EDIT_TYPES.len() + type_index(etype)
}

/// Encodes a candidate for a `systems`-system ensemble.
///
/// Bit (j, t) is set iff system j proposed the candidate, where t is the
/// candidate's type. All set bits therefore share the same type column,
/// and the number of set bits equals the agreement count.
pub fn encode(candidate: &Candidate, systems: usize) -> FeatureVector {
    let mut bits = vec![false; feature_dim(systems)];
    let etype = candidate.edit.etype();
    for &system in &candidate.proposed_by {
        debug_assert!(system < systems, "system index {system} out of range");
        bits[feature_index(system, etype)] = true;
    }
    FeatureVector { bits }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::toks;

    fn hyp(sentences: &[&str]) -> Vec<Vec<String>> {
        sentences.iter().map(|s| toks(s)).collect()
    }

    #[test]
    fn identical_edits_merge() {
        let source = toks("he eat food");
        let set = aggregate(&source, &hyp(&["he ate food", "he ate food", "he eat food"]));
        assert_eq!(set.candidates.len(), 1);
        let c = &set.candidates[0];
        assert_eq!(c.edit, Edit::new(1, 2, "ate").unwrap());
        assert_eq!(c.proposed_by.iter().copied().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(c.agreement(), 2);
        assert_eq!(set.systems, 3);
    }

    #[test]
    fn different_replacements_stay_separate() {
        let source = toks("a b c");
        let set = aggregate(&source, &hyp(&["a x c", "a y c"]));
        let repls: Vec<&str> = set.candidates.iter().map(|c| c.edit.replacement()).collect();
        assert_eq!(repls, vec!["x", "y"]);
    }

    #[test]
    fn candidates_sorted_by_span() {
        let source = toks("a b c d");
        let set = aggregate(&source, &hyp(&["a b c x", "y b c d"]));
        let spans: Vec<(usize, usize)> =
            set.candidates.iter().map(|c| (c.edit.start(), c.edit.end())).collect();
        assert_eq!(spans, vec![(0, 1), (3, 4)]);
    }

    #[test]
    fn aggregation_ignores_system_order() {
        let source = toks("a b c");
        let forward = aggregate(&source, &hyp(&["a x c", "a b"]));
        let backward = aggregate(&source, &hyp(&["a b", "a x c"]));
        let spans = |s: &CandidateSet| {
            s.candidates.iter().map(|c| c.edit.clone()).collect::<Vec<_>>()
        };
        assert_eq!(spans(&forward), spans(&backward));
    }

    #[test]
    fn encode_sets_one_bit_per_proposer() {
        let candidate = Candidate {
            edit: Edit::new(1, 2, "ate").unwrap(),
            proposed_by: [0, 2].into_iter().collect(),
        };
        let fv = encode(&candidate, 3);
        assert_eq!(fv.len(), 9);
        // Replacement is type column 1: slots 0*3+1 and 2*3+1.
        assert_eq!(fv.ones().collect::<Vec<_>>(), vec![1, 7]);
        assert_eq!(fv.count_ones(), candidate.agreement());
    }

    #[test]
    fn encode_uses_type_column() {
        let insertion = Candidate {
            edit: Edit::new(2, 2, "the").unwrap(),
            proposed_by: [1].into_iter().collect(),
        };
        let deletion = Candidate {
            edit: Edit::new(0, 1, "").unwrap(),
            proposed_by: [1].into_iter().collect(),
        };
        assert_eq!(encode(&insertion, 2).ones().collect::<Vec<_>>(), vec![3]);
        assert_eq!(encode(&deletion, 2).ones().collect::<Vec<_>>(), vec![5]);
    }

    #[test]
    fn feature_dim_is_three_per_system() {
        assert_eq!(feature_dim(9), 27);
        assert_eq!(feature_index(0, EditType::Missing), 0);
        assert_eq!(feature_index(8, EditType::Unnecessary), 26);
    }
}
