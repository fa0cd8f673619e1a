//! Manifest-driven experiments: train a combiner, evaluate it against the
//! baselines over a config grid, and emit CSV plus a text summary.
//!
//! A manifest is a TOML file naming the corpora, the split, the training
//! settings, and the grid of combine configurations. All randomness is
//! seeded, report rows have a fixed order, and floats are printed with
//! fixed precision, so one manifest always produces byte-identical reports.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::Edit;
use crate::baselines::{
    edit_majority_vote, mbr_select, weighted_sentence_vote, VoteConfig, VoteError,
};
use crate::candidates::aggregate;
use crate::classifier::{
    label_candidates, train, LabeledExample, LinearModel, TrainError, TrainingConfig,
};
use crate::combiner::{combine_corpus, CombineConfig, CombineError};
use crate::corpus::{load_gold_m2, load_hypothesis_files, read_token_lines, CorpusError};
use crate::harness::synth::split_indices;
use crate::m2::{annotation_edits, M2Error, M2Sentence};
use crate::scorer::{score_corpus, ScoreError, ScoreReport};

fn default_train_frac() -> f64 {
    0.70
}
fn default_dev_frac() -> f64 {
    0.15
}
fn default_test_frac() -> f64 {
    0.15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSection {
    pub source: PathBuf,
    pub hypotheses: Vec<PathBuf>,
    pub gold: PathBuf,
    /// Display names per system; defaults to sys0, sys1, ...
    #[serde(default)]
    pub names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSection {
    #[serde(default = "default_train_frac")]
    pub train: f64,
    #[serde(default = "default_dev_frac")]
    pub dev: f64,
    #[serde(default = "default_test_frac")]
    pub test: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            train: default_train_frac(),
            dev: default_dev_frac(),
            test: default_test_frac(),
            seed: 0,
        }
    }
}

/// Grid of pipeline settings; the cartesian product of the five lists is
/// evaluated. Empty lists fall back to the default config's single value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GridSection {
    #[serde(default)]
    pub tau: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub cap: Vec<f64>,
    #[serde(default)]
    pub iou_theta: Vec<f64>,
    /// Vote thresholds for the edit-level majority baseline.
    #[serde(default)]
    pub min_votes: Vec<usize>,
    /// "Best N systems by dev F0.5" subset sizes to retrain and evaluate.
    #[serde(default)]
    pub subset_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub data: DataSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default = "TrainingConfig::default")]
    pub train: TrainingConfig,
    #[serde(default)]
    pub grid: GridSection,
    pub output: OutputSection,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read manifest {path}: {source}")]
    ManifestRead { path: PathBuf, source: std::io::Error },
    #[error("manifest {path} is not valid TOML: {source}")]
    ManifestToml { path: PathBuf, source: Box<toml::de::Error> },
    #[error("invalid manifest: {reason}")]
    BadManifest { reason: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("gold sentence {sentence}: {cause}")]
    Gold { sentence: usize, cause: M2Error },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Combine(#[from] CombineError),
    #[error(transparent)]
    Vote(#[from] VoteError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("cannot write report {path}: {source}")]
    ReportWrite { path: PathBuf, source: std::io::Error },
    #[error("cannot write report {path}: {source}")]
    ReportCsv { path: PathBuf, source: csv::Error },
}

impl ExperimentManifest {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Renders the manifest as TOML. Manifests hold only tables of plain
    /// values, so serialization cannot fail.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("manifest serializes to TOML")
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| HarnessError::ManifestRead { path: path.to_owned(), source })?;
        Self::from_toml(&text).map_err(|source| HarnessError::ManifestToml {
            path: path.to_owned(),
            source: Box::new(source),
        })
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |reason: String| Err(HarnessError::BadManifest { reason });
        if self.data.hypotheses.is_empty() {
            return bad("at least one hypothesis file is required".into());
        }
        if !self.data.names.is_empty() && self.data.names.len() != self.data.hypotheses.len() {
            return bad(format!(
                "{} names for {} hypothesis files",
                self.data.names.len(),
                self.data.hypotheses.len()
            ));
        }
        let s = &self.split;
        let positive = s.train > 0.0 && s.dev >= 0.0 && s.test >= 0.0;
        if !positive || (s.train + s.dev + s.test - 1.0).abs() > 1e-9 {
            return bad("split fractions must be non-negative, train > 0, and sum to 1".into());
        }
        let k = self.data.hypotheses.len();
        if self.grid.min_votes.iter().any(|&m| m == 0 || m > k) {
            return bad(format!("min_votes entries must lie in 1..={k}"));
        }
        if self.grid.subset_sizes.iter().any(|&n| n == 0 || n > k) {
            return bad(format!("subset_sizes entries must lie in 1..={k}"));
        }
        Ok(())
    }

    /// System display names, filled with defaults when absent.
    pub fn system_names(&self) -> Vec<String> {
        if self.data.names.is_empty() {
            (0..self.data.hypotheses.len()).map(|i| format!("sys{i}")).collect()
        } else {
            self.data.names.clone()
        }
    }

    /// All combine configs in the grid, in a fixed nesting order.
    pub fn combine_grid(&self) -> Vec<CombineConfig> {
        let base = CombineConfig::default();
        let or_default = |list: &[f64], value: f64| {
            if list.is_empty() {
                vec![value]
            } else {
                list.to_vec()
            }
        };
        let taus = or_default(&self.grid.tau, base.tau);
        let alphas = or_default(&self.grid.alpha, base.alpha);
        let betas = or_default(&self.grid.beta, base.beta);
        let caps = or_default(&self.grid.cap, base.cap);
        let thetas = or_default(&self.grid.iou_theta, base.iou_theta);
        let mut grid = Vec::new();
        for &tau in &taus {
            for &alpha in &alphas {
                for &beta in &betas {
                    for &cap in &caps {
                        for &iou_theta in &thetas {
                            grid.push(CombineConfig { tau, alpha, beta, cap, iou_theta });
                        }
                    }
                }
            }
        }
        grid
    }
}

/// One evaluated strategy with dev and test metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub strategy: String,
    pub params: String,
    pub dev: ScoreReport,
    pub test: ScoreReport,
}

/// Everything an experiment produced, before report files are written.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub system_names: Vec<String>,
    /// Dev F0.5 per system, the weights used for the weighted vote.
    pub dev_f05: Vec<f64>,
    pub model: LinearModel,
    pub sentences: usize,
    pub train_sentences: usize,
    pub dev_sentences: usize,
    pub test_sentences: usize,
}

/// Lowest-id annotator's edits per sentence; the training label source.
pub fn gold_edit_lists(gold: &[M2Sentence]) -> Result<Vec<Vec<Edit>>, HarnessError> {
    gold.iter()
        .enumerate()
        .map(|(sentence, m2)| {
            let annotation = m2
                .annotations
                .first()
                .expect("parser guarantees at least one annotation");
            annotation_edits(annotation).map_err(|cause| HarnessError::Gold { sentence, cause })
        })
        .collect()
}

/// Pools and labels the candidates of the selected sentences.
pub fn build_training_set(
    sources: &[Vec<String>],
    hypotheses: &[Vec<Vec<String>>],
    gold_edits: &[Vec<Edit>],
    indices: &[usize],
) -> Vec<LabeledExample> {
    let mut examples = Vec::new();
    for &i in indices {
        let set = aggregate(&sources[i], &hypotheses[i]);
        examples.extend(label_candidates(&set, &gold_edits[i]));
    }
    examples
}

fn take<T: Clone>(items: &[T], indices: &[usize]) -> Vec<T> {
    indices.iter().map(|&i| items[i].clone()).collect()
}

struct EvalSplit {
    sources: Vec<Vec<String>>,
    hypotheses: Vec<Vec<Vec<String>>>,
    gold: Vec<M2Sentence>,
}

impl EvalSplit {
    fn score_outputs(&self, outputs: &[Vec<String>]) -> Result<ScoreReport, ScoreError> {
        score_corpus(&self.sources, outputs, &self.gold)
    }

    fn system_outputs(&self, system: usize) -> Vec<Vec<String>> {
        self.hypotheses.iter().map(|h| h[system].clone()).collect()
    }

    fn restrict_systems(&self, subset: &[usize]) -> EvalSplit {
        EvalSplit {
            sources: self.sources.clone(),
            hypotheses: self
                .hypotheses
                .iter()
                .map(|h| subset.iter().map(|&s| h[s].clone()).collect())
                .collect(),
            gold: self.gold.clone(),
        }
    }
}

fn format_config(cfg: &CombineConfig) -> String {
    format!(
        "tau={} alpha={} beta={} cap={} theta={}",
        cfg.tau, cfg.alpha, cfg.beta, cfg.cap, cfg.iou_theta
    )
}

/// Runs the full protocol for a manifest.
///
/// Corpus paths are resolved against `base`, the manifest file's directory.
/// The report rows come out in a fixed order: one per system, the sentence
/// vote, MBR, one edit-vote row per `min_votes`, one combine row per grid
/// point, then one retrained combine row per `subset_sizes` entry.
pub fn run_experiment(
    manifest: &ExperimentManifest,
    base: &Path,
) -> Result<ExperimentReport, HarnessError> {
    manifest.validate()?;
    let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };

    let sources = read_token_lines(&resolve(&manifest.data.source))?;
    let hyp_paths: Vec<PathBuf> = manifest.data.hypotheses.iter().map(&resolve).collect();
    let hypotheses = load_hypothesis_files(&hyp_paths, sources.len())?;
    let gold = load_gold_m2(&resolve(&manifest.data.gold), &sources)?;
    let gold_edits = gold_edit_lists(&gold)?;
    let names = manifest.system_names();
    let k = names.len();

    let split = split_indices(
        sources.len(),
        manifest.split.train,
        manifest.split.dev,
        manifest.split.seed,
    );
    let eval = |indices: &[usize]| EvalSplit {
        sources: take(&sources, indices),
        hypotheses: take(&hypotheses, indices),
        gold: take(&gold, indices),
    };
    let dev = eval(&split.dev);
    let test = eval(&split.test);

    let examples = build_training_set(&sources, &hypotheses, &gold_edits, &split.train);
    let model = train(&examples, &manifest.train)?.model;

    let mut rows = Vec::new();
    let mut dev_f05 = Vec::with_capacity(k);
    for (system, name) in names.iter().enumerate() {
        let dev_report = dev.score_outputs(&dev.system_outputs(system))?;
        let test_report = test.score_outputs(&test.system_outputs(system))?;
        dev_f05.push(dev_report.f05);
        rows.push(ReportRow {
            strategy: format!("system {name}"),
            params: String::new(),
            dev: dev_report,
            test: test_report,
        });
    }

    // Systems ranked by dev F0.5, best first; ties to the lower index.
    let mut ranking: Vec<usize> = (0..k).collect();
    ranking.sort_by(|&a, &b| dev_f05[b].total_cmp(&dev_f05[a]).then(a.cmp(&b)));

    let vote_outputs = |split: &EvalSplit| -> Result<Vec<Vec<String>>, VoteError> {
        split.hypotheses.iter().map(|h| weighted_sentence_vote(h, &dev_f05)).collect()
    };
    rows.push(ReportRow {
        strategy: "weighted-vote".into(),
        params: "weights=dev-f05".into(),
        dev: dev.score_outputs(&vote_outputs(&dev)?)?,
        test: test.score_outputs(&vote_outputs(&test)?)?,
    });

    let mbr_outputs = |split: &EvalSplit| -> Result<Vec<Vec<String>>, VoteError> {
        split.hypotheses.iter().map(|h| mbr_select(h)).collect()
    };
    rows.push(ReportRow {
        strategy: "mbr".into(),
        params: String::new(),
        dev: dev.score_outputs(&mbr_outputs(&dev)?)?,
        test: test.score_outputs(&mbr_outputs(&test)?)?,
    });

    let default_votes = vec![k / 2 + 1];
    let min_votes = if manifest.grid.min_votes.is_empty() {
        &default_votes
    } else {
        &manifest.grid.min_votes
    };
    for &m in min_votes {
        let cfg = VoteConfig { min_votes: m, system_subset: None };
        let mv_outputs = |split: &EvalSplit| -> Result<Vec<Vec<String>>, VoteError> {
            split
                .sources
                .iter()
                .zip(&split.hypotheses)
                .map(|(source, hyps)| edit_majority_vote(&aggregate(source, hyps), &cfg))
                .collect()
        };
        rows.push(ReportRow {
            strategy: "edit-vote".into(),
            params: format!("min_votes={m}"),
            dev: dev.score_outputs(&mv_outputs(&dev)?)?,
            test: test.score_outputs(&mv_outputs(&test)?)?,
        });
    }

    for cfg in manifest.combine_grid() {
        let dev_out = combine_corpus(&dev.sources, &dev.hypotheses, &model, &cfg)?;
        let test_out = combine_corpus(&test.sources, &test.hypotheses, &model, &cfg)?;
        rows.push(ReportRow {
            strategy: "combine".into(),
            params: format_config(&cfg),
            dev: dev.score_outputs(&dev_out)?,
            test: test.score_outputs(&test_out)?,
        });
    }

    // "Best N" rows restrict the ensemble and retrain, since the classifier
    // dimension is tied to the system count.
    let base_cfg = manifest.combine_grid().into_iter().next().unwrap_or_default();
    for &n in &manifest.grid.subset_sizes {
        let subset: Vec<usize> = {
            let mut chosen = ranking[..n].to_vec();
            chosen.sort_unstable();
            chosen
        };
        let sub_hypotheses: Vec<Vec<Vec<String>>> = hypotheses
            .iter()
            .map(|h| subset.iter().map(|&s| h[s].clone()).collect())
            .collect();
        let sub_examples =
            build_training_set(&sources, &sub_hypotheses, &gold_edits, &split.train);
        let sub_model = train(&sub_examples, &manifest.train)?.model;
        let sub_dev = dev.restrict_systems(&subset);
        let sub_test = test.restrict_systems(&subset);
        let dev_out = combine_corpus(&sub_dev.sources, &sub_dev.hypotheses, &sub_model, &base_cfg)?;
        let test_out =
            combine_corpus(&sub_test.sources, &sub_test.hypotheses, &sub_model, &base_cfg)?;
        let members: Vec<&str> = subset.iter().map(|&s| names[s].as_str()).collect();
        rows.push(ReportRow {
            strategy: format!("combine-best-{n}"),
            params: format!("systems={} {}", members.join("+"), format_config(&base_cfg)),
            dev: sub_dev.score_outputs(&dev_out)?,
            test: sub_test.score_outputs(&test_out)?,
        });
    }

    Ok(ExperimentReport {
        rows,
        system_names: names,
        dev_f05,
        model,
        sentences: sources.len(),
        train_sentences: split.train.len(),
        dev_sentences: split.dev.len(),
        test_sentences: split.test.len(),
    })
}

fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

/// Writes `report.csv`, `summary.txt`, and `model.json` into the output
/// directory (resolved against `base`), creating it if needed. Returns the
/// paths written.
pub fn write_report(
    manifest: &ExperimentManifest,
    report: &ExperimentReport,
    base: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    let dir = if manifest.output.dir.is_absolute() {
        manifest.output.dir.clone()
    } else {
        base.join(&manifest.output.dir)
    };
    std::fs::create_dir_all(&dir)
        .map_err(|source| HarnessError::ReportWrite { path: dir.clone(), source })?;

    let csv_path = dir.join("report.csv");
    let mut writer = csv::Writer::from_path(&csv_path)
        .map_err(|source| HarnessError::ReportCsv { path: csv_path.clone(), source })?;
    let write_err = |source: csv::Error| HarnessError::ReportCsv { path: csv_path.clone(), source };
    writer
        .write_record([
            "strategy", "params", "dev_p", "dev_r", "dev_f1", "dev_f05", "test_p", "test_r",
            "test_f1", "test_f05",
        ])
        .map_err(write_err)?;
    for row in &report.rows {
        writer
            .write_record([
                row.strategy.as_str(),
                row.params.as_str(),
                &fmt4(row.dev.precision),
                &fmt4(row.dev.recall),
                &fmt4(row.dev.f1),
                &fmt4(row.dev.f05),
                &fmt4(row.test.precision),
                &fmt4(row.test.recall),
                &fmt4(row.test.f1),
                &fmt4(row.test.f05),
            ])
            .map_err(write_err)?;
    }
    writer.flush().map_err(|source| HarnessError::ReportWrite { path: csv_path.clone(), source })?;

    let model_path = dir.join("model.json");
    std::fs::write(&model_path, report.model.to_json())
        .map_err(|source| HarnessError::ReportWrite { path: model_path.clone(), source })?;

    let summary_path = dir.join("summary.txt");
    std::fs::write(&summary_path, render_summary(report))
        .map_err(|source| HarnessError::ReportWrite { path: summary_path.clone(), source })?;

    Ok(vec![csv_path, model_path, summary_path])
}

/// Human-readable companion to the CSV.
pub fn render_summary(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{} sentences ({} train / {} dev / {} test), {} systems\n",
        report.sentences,
        report.train_sentences,
        report.dev_sentences,
        report.test_sentences,
        report.system_names.len()
    ));
    out.push_str("per-system dev F0.5: ");
    let weights: Vec<String> = report
        .system_names
        .iter()
        .zip(&report.dev_f05)
        .map(|(name, f)| format!("{name}={}", fmt4(*f)))
        .collect();
    out.push_str(&weights.join(" "));
    out.push('\n');
    out.push('\n');

    let width = report
        .rows
        .iter()
        .map(|r| r.strategy.len())
        .max()
        .unwrap_or(8)
        .max("strategy".len());
    out.push_str(&format!(
        "{:width$}  {:>7} {:>7} {:>7} {:>8} | {:>7} {:>7} {:>7} {:>8}  params\n",
        "strategy", "dev P", "dev R", "dev F1", "dev F0.5", "test P", "test R", "test F1",
        "test F0.5",
    ));
    for row in &report.rows {
        out.push_str(&format!(
            "{:width$}  {:>7} {:>7} {:>7} {:>8} | {:>7} {:>7} {:>7} {:>8}  {}\n",
            row.strategy,
            fmt4(row.dev.precision),
            fmt4(row.dev.recall),
            fmt4(row.dev.f1),
            fmt4(row.dev.f05),
            fmt4(row.test.precision),
            fmt4(row.test.recall),
            fmt4(row.test.f1),
            fmt4(row.test.f05),
            row.params,
        ));
    }

    if let Some(best) = report
        .rows
        .iter()
        .max_by(|a, b| a.dev.f05.total_cmp(&b.dev.f05))
    {
        out.push('\n');
        out.push_str(&format!(
            "best by dev F0.5: {} {} (dev {}, test {})\n",
            best.strategy,
            best.params,
            fmt4(best.dev.f05),
            fmt4(best.test.f05)
        ));
    }
    out
}

/// Evaluates one trained model across `taus` on a fixed corpus; the other
/// pipeline settings come from `base_cfg`. Used by the threshold sweep.
pub fn threshold_sweep(
    sources: &[Vec<String>],
    hypotheses: &[Vec<Vec<String>>],
    gold: &[M2Sentence],
    model: &LinearModel,
    base_cfg: &CombineConfig,
    taus: &[f64],
) -> Result<Vec<(f64, ScoreReport)>, HarnessError> {
    let mut results = Vec::with_capacity(taus.len());
    for &tau in taus {
        let cfg = CombineConfig { tau, ..base_cfg.clone() };
        let outputs = combine_corpus(sources, hypotheses, model, &cfg)?;
        let report = score_corpus(sources, &outputs, gold)?;
        results.push((tau, report));
    }
    Ok(results)
}
