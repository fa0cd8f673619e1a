//! Synthetic corpora and experiment orchestration.
//!
//! `synth` fabricates a sentence-aligned corpus (clean text, corrupted
//! source, gold edits, k imperfect system outputs) from a seed; `experiment`
//! drives the train / combine / score loop over a manifest and writes
//! reports. Together they stand in for the expensive fine-tuned base systems
//! the combination method normally consumes.

pub mod experiment;
pub mod synth;

pub use experiment::{run_experiment, ExperimentManifest, ExperimentReport, ReportRow};
pub use synth::{generate, SyntheticCorpus, SyntheticSpec};
