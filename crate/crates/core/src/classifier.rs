//! Logistic-regression edit classifier.
//!
//! A single linear layer over the (system, edit type) feature bits, trained
//! with minibatch SGD on binary cross-entropy. The update rule mirrors the
//! common deep-learning convention: per-batch mean gradient, optional L2
//! weight decay folded into the gradient, optional momentum with dampening.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::Edit;
use crate::candidates::{encode, CandidateSet, FeatureVector, EDIT_TYPES};

/// Logits are clamped to this magnitude before the sigmoid so saturated
/// candidates cannot produce non-finite losses.
pub const LOGIT_CLAMP: f64 = 30.0;

fn default_learning_rate() -> f64 {
    0.1
}
fn default_batch_size() -> usize {
    16
}
fn default_epochs() -> usize {
    50
}
fn default_shuffle() -> bool {
    true
}
fn default_min_delta() -> f64 {
    1e-6
}

/// Optimizer and schedule settings for [`train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    /// Upper bound on epochs; training may stop earlier, see `min_delta`.
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub weight_decay: f64,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default)]
    pub dampening: f64,
    #[serde(default = "default_shuffle")]
    pub shuffle: bool,
    /// Stop once the epoch-mean training loss improves by less than this.
    #[serde(default = "default_min_delta")]
    pub min_delta: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: default_learning_rate(),
            batch_size: default_batch_size(),
            epochs: default_epochs(),
            weight_decay: 0.0,
            momentum: 0.0,
            dampening: 0.0,
            shuffle: default_shuffle(),
            min_delta: default_min_delta(),
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |what: &str| Err(TrainError::BadConfig { reason: what.to_owned() });
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive and finite");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad("weight_decay must be non-negative");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.dampening) {
            return bad("dampening must lie in [0, 1]");
        }
        if !(self.min_delta.is_finite() && self.min_delta >= 0.0) {
            return bad("min_delta must be non-negative");
        }
        Ok(())
    }
}

/// One training instance: encoded candidate plus its gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub features: FeatureVector,
    pub label: bool,
}

/// Labels every candidate in `set` against a gold edit list.
///
/// A candidate is positive iff its `(start, end, replacement)` triple occurs
/// in `gold`; type labels and annotator metadata play no role.
pub fn label_candidates(set: &CandidateSet, gold: &[Edit]) -> Vec<LabeledExample> {
    let gold: std::collections::BTreeSet<&Edit> = gold.iter().collect();
    set.candidates
        .iter()
        .map(|c| LabeledExample {
            features: encode(c, set.systems),
            label: gold.contains(&c.edit),
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {reason}")]
    BadConfig { reason: String },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("feature dimension {dim} is not a multiple of {types} edit types")]
    BadDimension { dim: usize, types: usize },
    #[error("example {index} has dimension {found}, expected {expected}")]
    InconsistentDimensions { index: usize, expected: usize, found: usize },
    #[error("training diverged at epoch {epoch}: loss or weights became non-finite")]
    Diverged { epoch: usize },
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("feature vector has dimension {found}, model expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable binary cross-entropy from a logit.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (1.0 + (-z.abs()).exp()).ln()
}

fn clamped_logit(weights: &[f64], bias: f64, features: &FeatureVector) -> f64 {
    let z = features.ones().map(|i| weights[i]).sum::<f64>() + bias;
    // f64::clamp propagates a NaN input, which is what lets the divergence
    // check in `train` observe broken weights.
    z.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
}

/// Mean binary cross-entropy of `(weights, bias)` over `examples`.
pub fn mean_loss(weights: &[f64], bias: f64, examples: &[LabeledExample]) -> f64 {
    let total: f64 = examples
        .iter()
        .map(|ex| {
            let z = clamped_logit(weights, bias, &ex.features);
            bce_from_logit(z, if ex.label { 1.0 } else { 0.0 })
        })
        .sum();
    total / examples.len() as f64
}

/// Mean gradient of the binary cross-entropy over `examples`, as
/// `(d/d weights, d/d bias)`. The logit clamp is treated as inactive; with
/// zero initialization and sentence-scale feature counts the logits stay
/// well inside the clamp window during training.
pub fn mean_gradient(weights: &[f64], bias: f64, examples: &[LabeledExample]) -> (Vec<f64>, f64) {
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for ex in examples {
        let z = clamped_logit(weights, bias, &ex.features);
        let residual = sigmoid(z) - if ex.label { 1.0 } else { 0.0 };
        for i in ex.features.ones() {
            grad_w[i] += residual;
        }
        grad_b += residual;
    }
    let scale = 1.0 / examples.len() as f64;
    for g in &mut grad_w {
        *g *= scale;
    }
    (grad_w, grad_b * scale)
}

/// Result of [`train`]: the fitted model plus the loss trajectory.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinearModel,
    /// Epoch-mean training losses, one entry per executed epoch.
    pub losses: Vec<f64>,
    pub positive_examples: usize,
    pub negative_examples: usize,
}

impl TrainOutcome {
    pub fn epochs_run(&self) -> usize {
        self.losses.len()
    }

    pub fn final_loss(&self) -> f64 {
        *self.losses.last().expect("training runs at least one epoch")
    }

    /// A one-label training set fits a degenerate classifier; callers
    /// should surface this to the user.
    pub fn single_class(&self) -> bool {
        self.positive_examples == 0 || self.negative_examples == 0
    }
}

/// Fits a [`LinearModel`] on labeled candidates.
///
/// Weights and bias start at zero. Each epoch visits the data in minibatches
/// (shuffled with a deterministic generator when `shuffle` is set) and
/// applies, per parameter:
///
/// ```text
/// g   = grad + weight_decay * w
/// buf = momentum * buf + (1 - dampening) * g      (when momentum > 0)
/// w  -= learning_rate * g
/// ```
///
/// The reported epoch loss is the mean of the pre-update batch losses, so
/// two runs with the same data, config, and seed produce identical weights
/// and identical loss trajectories.
pub fn train(examples: &[LabeledExample], config: &TrainingConfig) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if examples.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let dim = examples[0].features.len();
    if dim == 0 || dim % EDIT_TYPES.len() != 0 {
        return Err(TrainError::BadDimension { dim, types: EDIT_TYPES.len() });
    }
    for (index, ex) in examples.iter().enumerate() {
        if ex.features.len() != dim {
            return Err(TrainError::InconsistentDimensions {
                index,
                expected: dim,
                found: ex.features.len(),
            });
        }
    }

    let systems = dim / EDIT_TYPES.len();
    let mut weights = vec![0.0f64; dim];
    let mut bias = 0.0f64;
    let mut momentum_w: Option<Vec<f64>> = None;
    let mut momentum_b = 0.0f64;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut losses = Vec::new();

    for epoch in 1..=config.epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<LabeledExample> = chunk.iter().map(|&i| examples[i].clone()).collect();
            loss_sum += mean_loss(&weights, bias, &batch) * batch.len() as f64;
            let (mut grad_w, mut grad_b) = mean_gradient(&weights, bias, &batch);
            if config.weight_decay > 0.0 {
                for (g, w) in grad_w.iter_mut().zip(&weights) {
                    *g += config.weight_decay * w;
                }
                grad_b += config.weight_decay * bias;
            }
            if config.momentum > 0.0 {
                // First step seeds the buffer with the raw gradient;
                // dampening only applies from the second step on.
                match momentum_w.as_mut() {
                    Some(buf) => {
                        for (b, g) in buf.iter_mut().zip(&grad_w) {
                            *b = config.momentum * *b + (1.0 - config.dampening) * g;
                        }
                        momentum_b = config.momentum * momentum_b + (1.0 - config.dampening) * grad_b;
                    }
                    None => {
                        momentum_w = Some(grad_w.clone());
                        momentum_b = grad_b;
                    }
                }
                grad_w.copy_from_slice(momentum_w.as_ref().expect("buffer initialized"));
                grad_b = momentum_b;
            }
            for (w, g) in weights.iter_mut().zip(&grad_w) {
                *w -= config.learning_rate * g;
            }
            bias -= config.learning_rate * grad_b;
        }
        let epoch_loss = loss_sum / examples.len() as f64;
        let finite = epoch_loss.is_finite()
            && bias.is_finite()
            && weights.iter().all(|w| w.is_finite());
        if !finite {
            return Err(TrainError::Diverged { epoch });
        }
        let improved_enough = match losses.last() {
            Some(&prev) => prev - epoch_loss >= config.min_delta,
            None => true,
        };
        losses.push(epoch_loss);
        if !improved_enough {
            break;
        }
    }

    let model = LinearModel {
        weights,
        bias,
        systems,
        training: config.clone(),
    };
    let positive_examples = examples.iter().filter(|ex| ex.label).count();
    Ok(TrainOutcome {
        model,
        losses,
        positive_examples,
        negative_examples: examples.len() - positive_examples,
    })
}

/// Trained edit classifier: a linear layer plus the config it was fit with.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
    bias: f64,
    systems: usize,
    training: TrainingConfig,
}

impl LinearModel {
    /// Builds a model from explicit parameters, for tests and external
    /// comparisons. `weights.len()` must equal `systems * 3`.
    pub fn from_parts(
        weights: Vec<f64>,
        bias: f64,
        systems: usize,
        training: TrainingConfig,
    ) -> Result<Self, ModelError> {
        let expected = systems * EDIT_TYPES.len();
        if weights.len() != expected {
            return Err(ModelError::DimensionMismatch { expected, found: weights.len() });
        }
        Ok(LinearModel { weights, bias, systems, training })
    }

    pub fn systems(&self) -> usize {
        self.systems
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn training_config(&self) -> &TrainingConfig {
        &self.training
    }

    /// Probability that the encoded candidate is a good edit.
    pub fn score(&self, features: &FeatureVector) -> Result<f64, ModelError> {
        if features.len() != self.weights.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.weights.len(),
                found: features.len(),
            });
        }
        Ok(sigmoid(clamped_logit(&self.weights, self.bias, features)))
    }
}

const MODEL_FORMAT: &str = "gecomb-edit-classifier";
const MODEL_VERSION: u32 = 1;

/// On-disk JSON shape of a model file.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    systems: usize,
    edit_types: Vec<String>,
    dimension: usize,
    weights: Vec<f64>,
    bias: f64,
    training: TrainingConfig,
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("cannot access model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model file has format \"{found}\", expected \"{expected}\"")]
    WrongFormat { expected: String, found: String },
    #[error("model file has version {found}, this build reads version {supported}")]
    UnsupportedVersion { supported: u32, found: u32 },
    #[error("model file is inconsistent: {reason}")]
    Inconsistent { reason: String },
}

impl LinearModel {
    /// Serializes the model to pretty-printed JSON. Weights round-trip
    /// exactly: the encoder emits the shortest decimal that parses back to
    /// the same f64.
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.to_owned(),
            version: MODEL_VERSION,
            systems: self.systems,
            edit_types: EDIT_TYPES.iter().map(|t| t.as_str().to_owned()).collect(),
            dimension: self.weights.len(),
            weights: self.weights.clone(),
            bias: self.bias,
            training: self.training.clone(),
        };
        let mut json = serde_json::to_string_pretty(&file).expect("model serializes");
        json.push('\n');
        json
    }

    pub fn from_json(text: &str) -> Result<Self, ModelIoError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(ModelIoError::WrongFormat {
                expected: MODEL_FORMAT.to_owned(),
                found: file.format,
            });
        }
        if file.version != MODEL_VERSION {
            return Err(ModelIoError::UnsupportedVersion {
                supported: MODEL_VERSION,
                found: file.version,
            });
        }
        let expected_types: Vec<String> = EDIT_TYPES.iter().map(|t| t.as_str().to_owned()).collect();
        if file.edit_types != expected_types {
            return Err(ModelIoError::Inconsistent {
                reason: format!("edit_types {:?} do not match {:?}", file.edit_types, expected_types),
            });
        }
        if file.dimension != file.weights.len() {
            return Err(ModelIoError::Inconsistent {
                reason: format!(
                    "dimension field says {} but {} weights are present",
                    file.dimension,
                    file.weights.len()
                ),
            });
        }
        if file.dimension != file.systems * EDIT_TYPES.len() {
            return Err(ModelIoError::Inconsistent {
                reason: format!(
                    "dimension {} does not equal systems {} x {} edit types",
                    file.dimension,
                    file.systems,
                    EDIT_TYPES.len()
                ),
            });
        }
        if !(file.bias.is_finite() && file.weights.iter().all(|w| w.is_finite())) {
            return Err(ModelIoError::Inconsistent {
                reason: "weights and bias must be finite".to_owned(),
            });
        }
        Ok(LinearModel {
            weights: file.weights,
            bias: file.bias,
            systems: file.systems,
            training: file.training,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelIoError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ModelIoError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::FeatureVector;

    fn fv(dim: usize, ones: &[usize]) -> FeatureVector {
        let mut bits = vec![false; dim];
        for &i in ones {
            bits[i] = true;
        }
        FeatureVector::from_bits(bits)
    }

    fn ex(dim: usize, ones: &[usize], label: bool) -> LabeledExample {
        LabeledExample { features: fv(dim, ones), label }
    }

    #[test]
    fn score_is_sigmoid_of_weight_sum() {
        let w = vec![0.0, 3f64.ln(), 0.0];
        let model = LinearModel::from_parts(w, 0.0, 1, TrainingConfig::default()).unwrap();
        let p = model.score(&fv(3, &[1])).unwrap();
        // sigmoid(ln 3) = 3/4 exactly up to rounding.
        assert!((p - 0.75).abs() < 1e-12, "got {p}");
    }

    #[test]
    fn score_rejects_wrong_dimension() {
        let model = LinearModel::from_parts(vec![0.0; 3], 0.0, 1, TrainingConfig::default()).unwrap();
        assert!(matches!(
            model.score(&fv(6, &[0])),
            Err(ModelError::DimensionMismatch { expected: 3, found: 6 })
        ));
    }

    #[test]
    fn saturated_logits_stay_finite() {
        let model =
            LinearModel::from_parts(vec![1e6, -1e6, 0.0], 0.0, 1, TrainingConfig::default()).unwrap();
        let hi = model.score(&fv(3, &[0])).unwrap();
        let lo = model.score(&fv(3, &[1])).unwrap();
        assert!(hi < 1.0 && hi > 0.999_999);
        assert!(lo > 0.0 && lo < 1e-6);
        let loss = mean_loss(model.weights(), 0.0, &[ex(3, &[0], false)]);
        assert!(loss.is_finite());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let examples = vec![
            ex(6, &[0, 4], true),
            ex(6, &[1], false),
            ex(6, &[2, 3, 5], true),
            ex(6, &[0], false),
        ];
        let weights = vec![0.3, -0.2, 0.05, 0.7, -0.4, 0.11];
        let bias = 0.09;
        let (grad_w, grad_b) = mean_gradient(&weights, bias, &examples);
        let h = 1e-6;
        for i in 0..weights.len() {
            let mut up = weights.clone();
            let mut down = weights.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (mean_loss(&up, bias, &examples) - mean_loss(&down, bias, &examples)) / (2.0 * h);
            assert!((fd - grad_w[i]).abs() < 1e-8, "slot {i}: fd {fd} vs {}", grad_w[i]);
        }
        let fd_b = (mean_loss(&weights, bias + h, &examples)
            - mean_loss(&weights, bias - h, &examples))
            / (2.0 * h);
        assert!((fd_b - grad_b).abs() < 1e-8);
    }

    #[test]
    fn training_separates_signal_from_noise() {
        // Slot 1 always right, slot 4 always wrong.
        let mut data = Vec::new();
        for _ in 0..32 {
            data.push(ex(6, &[1], true));
            data.push(ex(6, &[4], false));
        }
        let config = TrainingConfig { epochs: 200, ..TrainingConfig::default() };
        let outcome = train(&data, &config).unwrap();
        let good = outcome.model.score(&fv(6, &[1])).unwrap();
        let bad = outcome.model.score(&fv(6, &[4])).unwrap();
        assert!(good > 0.9, "positive slot scored {good}");
        assert!(bad < 0.1, "negative slot scored {bad}");
        assert!(outcome.final_loss() < 0.2);
    }

    #[test]
    fn single_positive_example_saturates_before_early_stop() {
        let data = vec![ex(3, &[0], true)];
        let config = TrainingConfig { epochs: 10_000, ..TrainingConfig::default() };
        let outcome = train(&data, &config).unwrap();
        // Early stopping fires once per-epoch improvement drops below
        // min_delta, well short of the epoch cap.
        assert!(outcome.epochs_run() < 10_000);
        let p = outcome.model.score(&fv(3, &[0])).unwrap();
        assert!(p > 0.99, "converged to {p}");
        assert!((outcome.positive_examples, outcome.negative_examples) == (1, 0));
        assert!(outcome.single_class());
    }

    #[test]
    fn training_is_deterministic() {
        let data: Vec<LabeledExample> = (0..50)
            .map(|i| ex(9, &[i % 9], i % 3 == 0))
            .collect();
        let config = TrainingConfig { epochs: 20, ..TrainingConfig::default() };
        let a = train(&data, &config).unwrap();
        let b = train(&data, &config).unwrap();
        assert_eq!(a.model.weights(), b.model.weights());
        assert_eq!(a.model.bias(), b.model.bias());
        assert_eq!(a.losses, b.losses);
    }

    #[test]
    fn contradictory_labels_cancel_within_a_batch() {
        // Same features with both labels in one batch: gradients cancel
        // exactly, the model stays at its zero initialization, and the
        // flat loss triggers the early stop on epoch two.
        let data = vec![ex(3, &[1], true), ex(3, &[1], false)];
        let outcome = train(&data, &TrainingConfig::default()).unwrap();
        assert_eq!(outcome.model.weights(), &[0.0, 0.0, 0.0]);
        assert_eq!(outcome.model.bias(), 0.0);
        assert_eq!(outcome.epochs_run(), 2);
        let p = outcome.model.score(&fv(3, &[1])).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn runaway_updates_report_divergence() {
        let data = vec![ex(3, &[0], true)];
        let config = TrainingConfig {
            learning_rate: 1e200,
            weight_decay: 10.0,
            epochs: 50,
            min_delta: 0.0,
            ..TrainingConfig::default()
        };
        match train(&data, &config) {
            Err(TrainError::Diverged { epoch }) => assert!(epoch <= 3, "diverged at {epoch}"),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(
            train(&[ex(4, &[0], true)], &TrainingConfig::default()),
            Err(TrainError::BadDimension { dim: 4, .. })
        ));
        let mixed = vec![ex(3, &[0], true), ex(6, &[0], true)];
        assert!(matches!(
            train(&mixed, &TrainingConfig::default()),
            Err(TrainError::InconsistentDimensions { index: 1, .. })
        ));
        assert!(matches!(train(&[], &TrainingConfig::default()), Err(TrainError::EmptyDataset)));
    }

    #[test]
    fn model_file_round_trips_exactly() {
        let data: Vec<LabeledExample> = (0..40).map(|i| ex(6, &[i % 6], i % 2 == 0)).collect();
        let outcome = train(&data, &TrainingConfig::default()).unwrap();
        let json = outcome.model.to_json();
        let back = LinearModel::from_json(&json).unwrap();
        assert_eq!(back.weights(), outcome.model.weights());
        assert_eq!(back.bias(), outcome.model.bias());
        assert_eq!(back.systems(), outcome.model.systems());
        assert_eq!(back.training_config(), outcome.model.training_config());
    }

    #[test]
    fn model_file_rejects_foreign_content() {
        let model = LinearModel::from_parts(vec![0.1, 0.2, 0.3], 0.0, 1, TrainingConfig::default())
            .unwrap();
        let json = model.to_json();
        let wrong_format = json.replace("gecomb-edit-classifier", "something-else");
        assert!(matches!(
            LinearModel::from_json(&wrong_format),
            Err(ModelIoError::WrongFormat { .. })
        ));
        let wrong_version = json.replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(
            LinearModel::from_json(&wrong_version),
            Err(ModelIoError::UnsupportedVersion { found: 99, .. })
        ));
        let wrong_dim = json.replace("\"dimension\": 3", "\"dimension\": 6");
        assert!(matches!(
            LinearModel::from_json(&wrong_dim),
            Err(ModelIoError::Inconsistent { .. })
        ));
        assert!(matches!(LinearModel::from_json("not json"), Err(ModelIoError::Json(_))));
    }

    #[test]
    fn labeling_matches_exact_triples() {
        use crate::alignment::toks;
        let source = toks("he eat a food");
        let hyps = vec![toks("he ate a food"), toks("he eat food")];
        let set = crate::candidates::aggregate(&source, &hyps);
        let gold = vec![Edit::new(1, 2, "ate").unwrap()];
        let labeled = label_candidates(&set, &gold);
        assert_eq!(labeled.len(), 2);
        let by_label: Vec<bool> = labeled.iter().map(|l| l.label).collect();
        // Candidates sort by span: (1,2,"ate") then (2,3,"").
        assert_eq!(by_label, vec![true, false]);
        assert_eq!(labeled[0].features.len(), 6);
    }
}
