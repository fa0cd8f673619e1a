//! Edit-level system combination for grammatical error correction.
//!
//! The pipeline: align each system's hypothesis with the source to get span
//! edits, pool identical edits across systems, score every pooled candidate
//! with a trained logistic regression over (system, edit type) features,
//! boost scores by cross-system agreement, filter on two thresholds, resolve
//! the survivors' span conflicts greedily, and apply what remains. Voting
//! and minimum-Bayes-risk selection are available as sentence-level
//! baselines, and a span-matching scorer closes the loop for evaluation.

pub mod alignment;
pub mod baselines;
pub mod candidates;
pub mod classifier;
pub mod combiner;
pub mod corpus;
pub mod harness;
pub mod m2;
pub mod scorer;

pub use alignment::{apply_edits, extract_edits, Edit, EditType};
pub use candidates::{aggregate, CandidateSet};
pub use classifier::{train, LinearModel, TrainingConfig};
pub use combiner::{combine_corpus, combine_sentence, CombineConfig};
pub use scorer::{score_corpus, ScoreReport};
