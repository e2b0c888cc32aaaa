//! Mini-batch Adam training with seeded shuffling, validation-loss early
//! stopping and best-epoch snapshotting.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Example;
use crate::encoding::{VocabError, Vocabulary};
use crate::kg::KnowledgeGraph;
use crate::knowledge::facts_for_hypothesis;
use crate::metrics::Metrics;
use crate::model::{argmax, EncodedInput, Label, Model, ModelConfig, ModelError, Params, Variant};
use crate::text::StopwordList;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Half-width of the uniform initialization interval.
    pub init_scale: f64,
    /// Minimum corpus frequency for a token to enter the vocabulary.
    pub min_freq: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            batch_size: 16,
            max_epochs: 16,
            patience: 5,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            init_scale: 0.1,
            min_freq: 1,
        }
    }
}

impl TrainConfig {
    /// Learning rate 2e-5, the value used for pretrained-encoder fine-tuning.
    /// Too small for the from-scratch toy encoder to make visible progress.
    pub fn fine_tuning_preset() -> Self {
        TrainConfig {
            learning_rate: 2e-5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: String| Err(TrainError::InvalidConfig(msg));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("betas must lie in [0, 1)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("{0} set is empty")]
    EmptyDataset(&'static str),
    #[error("non-finite loss at epoch {epoch}, batch {batch} (parameter norm {param_norm:.6e}, gradient norm {grad_norm:.6e})")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        param_norm: f64,
        grad_norm: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Vocab(#[from] VocabError),
}

/// Adam with bias-corrected first and second moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(learning_rate: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Adam {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn from_config(cfg: &TrainConfig) -> Self {
        Self::new(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One update; `params[i]` and `grads[i]` must have matching lengths on every call.
    pub fn step(&mut self, params: Vec<&mut [f64]>, grads: Vec<&[f64]>) {
        assert_eq!(params.len(), grads.len(), "parameter/gradient tensor count");
        if self.m.is_empty() {
            self.m = grads.iter().map(|g| vec![0.0; g.len()]).collect();
            self.v = self.m.clone();
        }
        self.step += 1;
        let t = self.step as f64;
        let c1 = 1.0 - libm::pow(self.beta1, t);
        let c2 = 1.0 - libm::pow(self.beta2, t);
        for (((p, g), m), v) in params
            .into_iter()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= self.learning_rate * m_hat / (libm::sqrt(v_hat) + self.epsilon);
            }
        }
    }

    pub fn step_params(&mut self, params: &mut Params, grads: &Params) {
        self.step(params.tensors_mut(), grads.tensors());
    }
}

/// Stops once an epoch fails to strictly improve on the best value and at
/// least `patience` epochs have passed since the best one. Epochs are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
        }
    }

    pub fn observe(&mut self, epoch: usize, value: f64) -> Observation {
        let improved = match self.best {
            None => true,
            Some((_, best)) => value < best,
        };
        if improved {
            self.best = Some((epoch, value));
            return Observation {
                improved,
                stop: false,
            };
        }
        let best_epoch = self.best.map_or(0, |(e, _)| e);
        Observation {
            improved,
            stop: epoch - best_epoch >= self.patience,
        }
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.best.map(|(e, _)| e)
    }

    pub fn best_value(&self) -> Option<f64> {
        self.best.map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-example loss over the epoch's batches, before each update.
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch with minimum validation loss (earliest on ties).
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainHistory {
    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|e| e.epoch == self.best_epoch)
    }
}

/// Vocabulary over premises, hypotheses and (for the proposed variant)
/// retrieved fact paragraphs of the training set.
pub fn build_training_vocab(
    variant: Variant,
    train_set: &[Example],
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
    min_freq: usize,
) -> Result<Vocabulary, VocabError> {
    let mut corpus: Vec<String> = Vec::with_capacity(train_set.len() * 3);
    for ex in train_set {
        corpus.push(ex.premise.clone());
        corpus.push(ex.hypothesis.clone());
        if variant == Variant::Proposed {
            corpus.push(String::from(
                facts_for_hypothesis(&ex.hypothesis, kg, stopwords).text(),
            ));
        }
    }
    Vocabulary::build(corpus, min_freq)
}

/// Builds the vocabulary from `train_set` and draws initial parameters from
/// the seeded generator.
pub fn prepare_model(
    variant: Variant,
    model_cfg: ModelConfig,
    train_set: &[Example],
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
    cfg: &TrainConfig,
) -> Result<Model, TrainError> {
    if train_set.is_empty() {
        return Err(TrainError::EmptyDataset("training"));
    }
    let vocab = build_training_vocab(variant, train_set, kg, stopwords, cfg.min_freq)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let model = Model::uniform(variant, model_cfg, vocab, cfg.init_scale, &mut rng);
    let (variant, config, vocab, params) = (
        model.variant(),
        *model.config(),
        model.vocab().clone(),
        model.params().clone(),
    );
    Ok(Model::new(variant, config, vocab, params)?)
}

/// Fact paragraphs are retrieved once per example; retrieval is deterministic.
pub fn encode_examples(
    model: &Model,
    examples: &[Example],
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
) -> Vec<(EncodedInput, Label)> {
    examples
        .iter()
        .map(|ex| {
            let facts = match model.variant() {
                Variant::Proposed => facts_for_hypothesis(&ex.hypothesis, kg, stopwords),
                Variant::Baseline => Default::default(),
            };
            (
                model.encode_input(&ex.premise, &ex.hypothesis, facts.text()),
                ex.label,
            )
        })
        .collect()
}

fn evaluate_encoded(
    model: &Model,
    data: &[(EncodedInput, Label)],
) -> Result<(f64, Metrics), ModelError> {
    let mut total = 0.0;
    let mut gold = Vec::with_capacity(data.len());
    let mut pred = Vec::with_capacity(data.len());
    for (input, label) in data {
        let probs = model.forward_encoded(input)?;
        total += crate::model::loss(&probs, *label);
        gold.push(*label);
        pred.push(argmax(&probs));
    }
    let mean = if data.is_empty() {
        0.0
    } else {
        total / data.len() as f64
    };
    Ok((mean, Metrics::from_predictions(&gold, &pred)))
}

pub fn train(
    model: Model,
    train_set: &[Example],
    val_set: &[Example],
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
    cfg: &TrainConfig,
) -> Result<(Model, TrainHistory), TrainError> {
    let train_data = encode_examples(&model, train_set, kg, stopwords);
    let val_data = encode_examples(&model, val_set, kg, stopwords);
    train_encoded(model, &train_data, &val_data, cfg)
}

/// Training loop over pre-encoded inputs. Returns the parameters snapshotted
/// at the best epoch.
pub fn train_encoded(
    mut model: Model,
    train_data: &[(EncodedInput, Label)],
    val_data: &[(EncodedInput, Label)],
    cfg: &TrainConfig,
) -> Result<(Model, TrainHistory), TrainError> {
    cfg.validate()?;
    if train_data.is_empty() {
        return Err(TrainError::EmptyDataset("training"));
    }
    if val_data.is_empty() {
        return Err(TrainError::EmptyDataset("validation"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut adam = Adam::from_config(cfg);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best_model = model.clone();
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..train_data.len()).collect();

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (batch_idx, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let (loss, grads) = model.batch_loss_and_grad(chunk.iter().map(|&i| &train_data[i]))?;
            if !loss.is_finite() || !grads.is_finite() {
                return Err(TrainError::NonFiniteLoss {
                    epoch,
                    batch: batch_idx,
                    param_norm: model.params().l2_norm(),
                    grad_norm: grads.l2_norm(),
                });
            }
            loss_sum += loss * chunk.len() as f64;
            adam.step_params(model.params_mut(), &grads);
        }
        let (_, train_metrics) = evaluate_encoded(&model, train_data)?;
        let (val_loss, val_metrics) = evaluate_encoded(&model, val_data)?;
        if !val_loss.is_finite() {
            return Err(TrainError::NonFiniteLoss {
                epoch,
                batch: usize::MAX,
                param_norm: model.params().l2_norm(),
                grad_norm: f64::NAN,
            });
        }
        epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_data.len() as f64,
            train_accuracy: train_metrics.accuracy,
            val_loss,
            val: val_metrics,
        });
        let obs = stopper.observe(epoch, val_loss);
        if obs.improved {
            best_model = model.clone();
        }
        if obs.stop {
            stopped_early = epoch < cfg.max_epochs;
            break;
        }
    }

    let history = TrainHistory {
        epochs,
        best_epoch: stopper.best_epoch().unwrap_or(1),
        stopped_early,
    };
    Ok((best_model, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Feeds a fixed validation-loss sequence; returns (epochs run, best epoch).
    fn run(losses: &[f64], patience: usize) -> (usize, usize) {
        let mut es = EarlyStopping::new(patience);
        for (i, &l) in losses.iter().enumerate() {
            if es.observe(i + 1, l).stop {
                return (i + 1, es.best_epoch().unwrap());
            }
        }
        (losses.len(), es.best_epoch().unwrap())
    }

    #[test]
    fn patience_five() {
        let losses = [1.0, 0.9, 0.95, 0.96, 0.97, 0.98, 0.99, 0.5, 0.4];
        assert_eq!(run(&losses, 5), (7, 2));
    }

    #[test]
    fn patience_zero_stops_at_first_non_improvement() {
        assert_eq!(run(&[1.0, 0.9, 0.8, 0.85, 0.1], 0), (4, 3));
    }

    #[test]
    fn ties_do_not_improve() {
        assert_eq!(run(&[1.0, 1.0, 1.0, 0.5], 2), (3, 1));
    }

    #[test]
    fn adam_first_step_on_quadratic() {
        let mut w = [1.0f64];
        let mut adam = Adam::new(0.1, 0.9, 0.999, 1e-8);
        let g = [2.0 * w[0]];
        adam.step(vec![&mut w[..]], vec![&g[..]]);
        assert!((w[0] - 0.9).abs() < 1e-8, "{}", w[0]);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            batch_size: 0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(TrainError::InvalidConfig(_))));
        let bad = TrainConfig {
            max_epochs: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(TrainConfig::fine_tuning_preset().learning_rate, 2e-5);
        assert_eq!(TrainConfig::fine_tuning_preset().batch_size, 16);
        assert_eq!(TrainConfig::fine_tuning_preset().patience, 5);
    }
}
