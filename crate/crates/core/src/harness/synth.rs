//! Seeded synthetic corpus generation.
//!
//! Each sentence starts from clean text over a closed vocabulary, gets
//! corrupted into a source sentence with insert/delete/replace noise, and is
//! then "corrected" by k simulated systems of configurable quality. Gold
//! edits are the canonical alignment from source back to clean text, so a
//! perfect system output equals the clean sentence by construction.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::alignment::{apply_edits, extract_edits, Edit};
use crate::combiner::edits_conflict;
use crate::corpus::{write_token_lines, CorpusError};
use crate::m2::{serialize_m2, Annotation, M2Sentence, RawEdit};

/// Shape and noise parameters for one synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub sentences: usize,
    pub systems: usize,
    pub vocab_size: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Per-token probability of corrupting the clean sentence.
    pub corruption_rate: f64,
    /// Per-system probability of applying each gold edit.
    pub fix_rates: Vec<f64>,
    /// Per-system, per-token probability of inventing a wrong edit.
    pub spurious_rates: Vec<f64>,
    /// Probability that a system copies system 0's decision instead of
    /// drawing its own; 0 gives independent systems.
    pub correlation: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Systems of identical quality; vocabulary and lengths get workable
    /// defaults.
    pub fn uniform(
        sentences: usize,
        systems: usize,
        fix_rate: f64,
        spurious_rate: f64,
        correlation: f64,
        seed: u64,
    ) -> Self {
        SyntheticSpec {
            sentences,
            systems,
            vocab_size: 50,
            min_len: 5,
            max_len: 15,
            corruption_rate: 0.15,
            fix_rates: vec![fix_rate; systems],
            spurious_rates: vec![spurious_rate; systems],
            correlation,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |what: &str| Err(SynthError::BadSpec { reason: what.to_owned() });
        if self.sentences == 0 {
            return bad("sentences must be at least 1");
        }
        if self.systems == 0 {
            return bad("systems must be at least 1");
        }
        if self.vocab_size < 2 {
            return bad("vocab_size must be at least 2 so replacements can differ");
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return bad("sentence length range must satisfy 1 <= min_len <= max_len");
        }
        if self.fix_rates.len() != self.systems || self.spurious_rates.len() != self.systems {
            return bad("fix_rates and spurious_rates need one entry per system");
        }
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.corruption_rate)
            || !in_unit(self.correlation)
            || !self.fix_rates.iter().all(|&r| in_unit(r))
            || !self.spurious_rates.iter().all(|&r| in_unit(r))
        {
            return bad("all rates must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {reason}")]
    BadSpec { reason: String },
}

/// A generated corpus, sentence-aligned across all fields.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub clean: Vec<Vec<String>>,
    pub sources: Vec<Vec<String>>,
    /// Canonical corrections turning each source into its clean sentence.
    pub gold: Vec<Vec<Edit>>,
    /// Per sentence, the k system outputs.
    pub hypotheses: Vec<Vec<Vec<String>>>,
    pub spec: SyntheticSpec,
}

/// Files written by [`SyntheticCorpus::write_to_dir`].
#[derive(Debug, Clone)]
pub struct GeneratedPaths {
    pub source: PathBuf,
    pub clean: PathBuf,
    pub gold: PathBuf,
    pub hypotheses: Vec<PathBuf>,
}

fn token(index: usize) -> String {
    format!("t{index}")
}

fn fresh_token(rng: &mut ChaCha20Rng, vocab: usize, avoid: Option<&str>) -> String {
    loop {
        let t = token(rng.random_range(0..vocab));
        if avoid != Some(t.as_str()) {
            return t;
        }
    }
}

/// One corruption / spurious-edit operation on a source position.
fn random_edit(rng: &mut ChaCha20Rng, vocab: usize, source: &[String], pos: usize) -> Edit {
    let roll: f64 = rng.random();
    if roll < 0.5 {
        // Replace the token with a different one.
        Edit::new(pos, pos + 1, fresh_token(rng, vocab, Some(&source[pos]))).unwrap()
    } else if roll < 0.75 {
        Edit::new(pos, pos + 1, "").unwrap()
    } else {
        Edit::new(pos, pos, fresh_token(rng, vocab, None)).unwrap()
    }
}

/// Generates a corpus deterministically from `spec.seed`.
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticCorpus, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut clean = Vec::with_capacity(spec.sentences);
    let mut sources = Vec::with_capacity(spec.sentences);
    let mut gold = Vec::with_capacity(spec.sentences);
    let mut hypotheses = Vec::with_capacity(spec.sentences);

    for _ in 0..spec.sentences {
        let len = rng.random_range(spec.min_len..=spec.max_len);
        let clean_sentence: Vec<String> =
            (0..len).map(|_| token(rng.random_range(0..spec.vocab_size))).collect();

        // Corrupt clean -> source token by token: emit a wrong token, drop
        // the token, or prepend a junk token.
        let mut source = Vec::with_capacity(len + 2);
        for tok in &clean_sentence {
            if rng.random_bool(spec.corruption_rate) {
                let roll: f64 = rng.random();
                if roll < 0.5 {
                    source.push(fresh_token(&mut rng, spec.vocab_size, Some(tok)));
                } else if roll < 0.75 {
                    // Deletion: the clean token never reaches the source.
                } else {
                    source.push(fresh_token(&mut rng, spec.vocab_size, None));
                    source.push(tok.clone());
                }
            } else {
                source.push(tok.clone());
            }
        }

        let gold_edits = extract_edits(&source, &clean_sentence);

        // System 0 draws its own decisions; later systems copy each of them
        // with probability `correlation`, otherwise draw fresh.
        let mut fix_decisions: Vec<Vec<bool>> = Vec::with_capacity(spec.systems);
        let mut spurious_draws: Vec<Vec<Option<Edit>>> = Vec::with_capacity(spec.systems);
        for system in 0..spec.systems {
            let fixes: Vec<bool> = (0..gold_edits.len())
                .map(|i| {
                    if system > 0 && rng.random_bool(spec.correlation) {
                        fix_decisions[0][i]
                    } else {
                        rng.random_bool(spec.fix_rates[system])
                    }
                })
                .collect();
            let spurious: Vec<Option<Edit>> = (0..source.len())
                .map(|pos| {
                    if system > 0 && rng.random_bool(spec.correlation) {
                        spurious_draws[0][pos].clone()
                    } else if rng.random_bool(spec.spurious_rates[system]) {
                        Some(random_edit(&mut rng, spec.vocab_size, &source, pos))
                    } else {
                        None
                    }
                })
                .collect();
            fix_decisions.push(fixes);
            spurious_draws.push(spurious);
        }

        let mut sentence_hyps = Vec::with_capacity(spec.systems);
        for system in 0..spec.systems {
            let mut selected: Vec<Edit> = gold_edits
                .iter()
                .zip(&fix_decisions[system])
                .filter(|(_, &fixed)| fixed)
                .map(|(e, _)| e.clone())
                .collect();
            // Spurious edits yield to the fixes and to each other.
            for edit in spurious_draws[system].iter().flatten() {
                if selected.iter().all(|kept| !edits_conflict(kept, edit, 0.0))
                    && !selected.contains(edit)
                {
                    selected.push(edit.clone());
                }
            }
            selected.sort_by_key(|e| (e.start(), e.end()));
            let hyp = apply_edits(&source, &selected)
                .expect("conflict-filtered edits are applicable");
            sentence_hyps.push(hyp);
        }

        clean.push(clean_sentence);
        sources.push(source);
        gold.push(gold_edits);
        hypotheses.push(sentence_hyps);
    }

    Ok(SyntheticCorpus { clean, sources, gold, hypotheses, spec: spec.clone() })
}

impl SyntheticCorpus {
    /// Gold edits as single-annotator M2 sentences.
    pub fn gold_m2(&self) -> Vec<M2Sentence> {
        self.sources
            .iter()
            .zip(&self.gold)
            .map(|(source, edits)| M2Sentence {
                source_tokens: source.clone(),
                annotations: vec![Annotation {
                    annotator_id: 0,
                    edits: edits
                        .iter()
                        .map(|e| RawEdit {
                            start: e.start(),
                            end: e.end(),
                            raw_type: e.etype().as_str().to_owned(),
                            correction: e.replacement().to_owned(),
                        })
                        .collect(),
                }],
            })
            .collect()
    }

    /// Hypotheses of one system across the corpus.
    pub fn system_outputs(&self, system: usize) -> Vec<Vec<String>> {
        self.hypotheses.iter().map(|h| h[system].clone()).collect()
    }

    /// Writes `source.txt`, `clean.txt`, `gold.m2`, and one `hyp<j>.txt`
    /// per system into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<GeneratedPaths, CorpusError> {
        let source = dir.join("source.txt");
        let clean = dir.join("clean.txt");
        let gold = dir.join("gold.m2");
        write_token_lines(&source, &self.sources)?;
        write_token_lines(&clean, &self.clean)?;
        std::fs::write(&gold, serialize_m2(&self.gold_m2()))
            .map_err(|e| CorpusError::Write { path: gold.clone(), source: e })?;
        let mut hyp_paths = Vec::with_capacity(self.spec.systems);
        for system in 0..self.spec.systems {
            let path = dir.join(format!("hyp{system}.txt"));
            write_token_lines(&path, &self.system_outputs(system))?;
            hyp_paths.push(path);
        }
        Ok(GeneratedPaths { source, clean, gold, hypotheses: hyp_paths })
    }
}

/// Deterministic 70/15/15 sentence split (or any other fractions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub dev: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles sentence indices with the seed and cuts them into three parts
/// of `train_frac` and `dev_frac` proportions, rest to test. Within each
/// part, indices are sorted so downstream corpora keep their order.
pub fn split_indices(n: usize, train_frac: f64, dev_frac: f64, seed: u64) -> Split {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let train_end = (n as f64 * train_frac).floor() as usize;
    let dev_end = train_end + (n as f64 * dev_frac).floor() as usize;
    let mut train: Vec<usize> = order[..train_end].to_vec();
    let mut dev: Vec<usize> = order[train_end..dev_end.min(n)].to_vec();
    let mut test: Vec<usize> = order[dev_end.min(n)..].to_vec();
    train.sort_unstable();
    dev.sort_unstable();
    test.sort_unstable();
    Split { train, dev, test }
}
