//! NLI encoder + fact encoder + concatenation + MLP classifier, and the
//! baseline variant that has no fact encoder.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{EncodeError, EncodedSeq, EncoderParams, EncoderTrace, Vocabulary};
use crate::kg::KnowledgeGraph;
use crate::knowledge::{facts_for_hypothesis, FactParagraph};
use crate::tensor::{axpy, uniform_vec, Matrix};
use crate::text::StopwordList;

/// Probabilities at or below this are clamped before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailment = 0,
    Contradiction = 1,
    Neutral = 2,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Contradiction, Label::Neutral];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Contradiction => "contradiction",
            Label::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::ALL
            .into_iter()
            .find(|l| s.trim().eq_ignore_ascii_case(l.as_str()))
            .ok_or_else(|| UnknownLabel(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// NLI and fact representations concatenated.
    Proposed,
    /// NLI representation only; never reads facts.
    Baseline,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Proposed => "proposed",
            Variant::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub pair_max_len: usize,
    pub fact_max_len: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 32,
            hidden_dim: 32,
            pair_max_len: 64,
            fact_max_len: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// `logits = W2 · relu(W1 · z + b1) + b2`
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierParams {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

impl ClassifierParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        ClassifierParams {
            w1: Matrix::zeros(hidden_dim, input_dim),
            b1: vec![0.0; hidden_dim],
            w2: Matrix::zeros(3, hidden_dim),
            b2: vec![0.0; 3],
        }
    }

    pub fn uniform<R: Rng + ?Sized>(
        input_dim: usize,
        hidden_dim: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        ClassifierParams {
            w1: Matrix::uniform(hidden_dim, input_dim, scale, rng),
            b1: uniform_vec(hidden_dim, scale, rng),
            w2: Matrix::uniform(3, hidden_dim, scale, rng),
            b2: uniform_vec(3, scale, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.cols()
    }
}

/// Every trainable tensor of a model. Also used as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub nli: EncoderParams,
    pub fact: Option<EncoderParams>,
    pub classifier: ClassifierParams,
}

impl Params {
    pub fn zeros(variant: Variant, vocab_size: usize, cfg: &ModelConfig) -> Self {
        let enc = || EncoderParams::zeros(vocab_size, cfg.embed_dim, cfg.hidden_dim);
        Params {
            nli: enc(),
            fact: (variant == Variant::Proposed).then(enc),
            classifier: ClassifierParams::zeros(input_dim(variant, cfg.hidden_dim), cfg.hidden_dim),
        }
    }

    /// Uniform(−scale, scale) in a fixed tensor order.
    pub fn uniform<R: Rng + ?Sized>(
        variant: Variant,
        vocab_size: usize,
        cfg: &ModelConfig,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let nli = EncoderParams::uniform(vocab_size, cfg.embed_dim, cfg.hidden_dim, scale, rng);
        let fact = (variant == Variant::Proposed)
            .then(|| EncoderParams::uniform(vocab_size, cfg.embed_dim, cfg.hidden_dim, scale, rng));
        let classifier = ClassifierParams::uniform(
            input_dim(variant, cfg.hidden_dim),
            cfg.hidden_dim,
            scale,
            rng,
        );
        Params {
            nli,
            fact,
            classifier,
        }
    }

    pub fn zeros_like(&self) -> Self {
        let enc =
            |e: &EncoderParams| EncoderParams::zeros(e.vocab_size(), e.embed_dim(), e.hidden_dim());
        Params {
            nli: enc(&self.nli),
            fact: self.fact.as_ref().map(enc),
            classifier: ClassifierParams::zeros(
                self.classifier.input_dim(),
                self.classifier.b1.len(),
            ),
        }
    }

    /// Tensor names in the order used by [`Params::tensors`].
    pub fn tensor_names(&self) -> Vec<&'static str> {
        let mut names = vec!["nli.embedding", "nli.projection", "nli.bias"];
        if self.fact.is_some() {
            names.extend(["fact.embedding", "fact.projection", "fact.bias"]);
        }
        names.extend([
            "classifier.w1",
            "classifier.b1",
            "classifier.w2",
            "classifier.b2",
        ]);
        names
    }

    /// Tensor shapes in the order used by [`Params::tensors`]; vectors are `[len]`.
    pub fn tensor_shapes(&self) -> Vec<Vec<usize>> {
        let enc = |e: &EncoderParams| {
            [
                e.embedding.shape().to_vec(),
                e.projection.shape().to_vec(),
                vec![e.bias.len()],
            ]
        };
        let mut out: Vec<Vec<usize>> = enc(&self.nli).into();
        if let Some(f) = &self.fact {
            out.extend(enc(f));
        }
        let c = &self.classifier;
        out.extend([
            c.w1.shape().to_vec(),
            vec![c.b1.len()],
            c.w2.shape().to_vec(),
            vec![c.b2.len()],
        ]);
        out
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.nli.tensors().into();
        if let Some(f) = &self.fact {
            out.extend(f.tensors());
        }
        let c = &self.classifier;
        out.extend([c.w1.as_slice(), &c.b1[..], c.w2.as_slice(), &c.b2[..]]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self.nli.tensors_mut().into();
        if let Some(f) = &mut self.fact {
            out.extend(f.tensors_mut());
        }
        let c = &mut self.classifier;
        out.extend([
            c.w1.as_mut_slice(),
            &mut c.b1[..],
            c.w2.as_mut_slice(),
            &mut c.b2[..],
        ]);
        out
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(
            self.tensors()
                .iter()
                .flat_map(|t| t.iter())
                .map(|x| x * x)
                .sum(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|x| x.is_finite()))
    }
}

fn input_dim(variant: Variant, hidden_dim: usize) -> usize {
    match variant {
        Variant::Proposed => 2 * hidden_dim,
        Variant::Baseline => hidden_dim,
    }
}

/// Pre-tokenized model input: the premise/hypothesis pair and the fact paragraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedInput {
    pub pair: EncodedSeq,
    pub fact: EncodedSeq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub probs: [f64; 3],
    pub facts: FactParagraph,
}

struct ForwardTrace {
    nli: EncoderTrace,
    fact: Option<EncoderTrace>,
    z: Vec<f64>,
    pre_relu: Vec<f64>,
    hidden: Vec<f64>,
    probs: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    variant: Variant,
    config: ModelConfig,
    vocab: Vocabulary,
    params: Params,
}

impl Model {
    pub fn new(
        variant: Variant,
        config: ModelConfig,
        vocab: Vocabulary,
        params: Params,
    ) -> Result<Self, ModelError> {
        let m = Model {
            variant,
            config,
            vocab,
            params,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn zeros(variant: Variant, config: ModelConfig, vocab: Vocabulary) -> Self {
        let params = Params::zeros(variant, vocab.len(), &config);
        Model {
            variant,
            config,
            vocab,
            params,
        }
    }

    pub fn uniform<R: Rng + ?Sized>(
        variant: Variant,
        config: ModelConfig,
        vocab: Vocabulary,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let params = Params::uniform(variant, vocab.len(), &config, scale, rng);
        Model {
            variant,
            config,
            vocab,
            params,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let cfg = &self.config;
        let check_encoder = |name: &str, e: &EncoderParams| -> Result<(), ModelError> {
            if e.vocab_size() != self.vocab.len()
                || e.embed_dim() != cfg.embed_dim
                || e.hidden_dim() != cfg.hidden_dim
                || !e.shapes_consistent()
            {
                return Err(ModelError::Shape(format!(
                    "{name} encoder is {}x{} -> {}, expected {}x{} -> {}",
                    e.vocab_size(),
                    e.embed_dim(),
                    e.hidden_dim(),
                    self.vocab.len(),
                    cfg.embed_dim,
                    cfg.hidden_dim
                )));
            }
            Ok(())
        };
        check_encoder("nli", &self.params.nli)?;
        match (self.variant, &self.params.fact) {
            (Variant::Proposed, Some(f)) => check_encoder("fact", f)?,
            (Variant::Baseline, None) => {}
            (v, f) => {
                return Err(ModelError::Shape(format!(
                    "{v} model {} a fact encoder",
                    if f.is_some() {
                        "must not have"
                    } else {
                        "requires"
                    }
                )))
            }
        }
        let c = &self.params.classifier;
        let d_in = input_dim(self.variant, cfg.hidden_dim);
        if c.w1.shape() != [cfg.hidden_dim, d_in]
            || c.b1.len() != cfg.hidden_dim
            || c.w2.shape() != [3, cfg.hidden_dim]
            || c.b2.len() != 3
        {
            return Err(ModelError::Shape(format!(
                "classifier does not match input {d_in}, hidden {}",
                cfg.hidden_dim
            )));
        }
        if cfg.pair_max_len < 3 || cfg.fact_max_len < 1 {
            return Err(ModelError::Shape(format!(
                "max lengths too small: pair {} (>=3), fact {} (>=1)",
                cfg.pair_max_len, cfg.fact_max_len
            )));
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    /// Baseline models encode no facts regardless of `fact_text`.
    pub fn encode_input(&self, premise: &str, hypothesis: &str, fact_text: &str) -> EncodedInput {
        let pair = self
            .vocab
            .encode_pair(premise, hypothesis, self.config.pair_max_len);
        let fact = match self.variant {
            Variant::Proposed => self.vocab.encode_text(fact_text, self.config.fact_max_len),
            Variant::Baseline => EncodedSeq {
                ids: Vec::new(),
                length: 0,
            },
        };
        EncodedInput { pair, fact }
    }

    fn forward_trace(&self, input: &EncodedInput) -> Result<ForwardTrace, ModelError> {
        let nli = self
            .params
            .nli
            .forward(&input.pair.ids, input.pair.length)?;
        let mut z = nli.hidden.clone();
        let fact = match &self.params.fact {
            Some(enc) => {
                let t = enc.forward(&input.fact.ids, input.fact.length)?;
                z.extend_from_slice(&t.hidden);
                Some(t)
            }
            None => None,
        };
        let c = &self.params.classifier;
        if z.len() != c.input_dim() {
            return Err(ModelError::Shape(format!(
                "classifier expects {} inputs, got {}",
                c.input_dim(),
                z.len()
            )));
        }
        let pre_relu: Vec<f64> =
            c.w1.mul_vec(&z)
                .iter()
                .zip(&c.b1)
                .map(|(a, b)| a + b)
                .collect();
        let hidden: Vec<f64> = pre_relu.iter().map(|&a| a.max(0.0)).collect();
        let logits = c.w2.mul_vec(&hidden);
        let logits = [
            logits[0] + c.b2[0],
            logits[1] + c.b2[1],
            logits[2] + c.b2[2],
        ];
        Ok(ForwardTrace {
            nli,
            fact,
            z,
            pre_relu,
            hidden,
            probs: softmax(logits),
        })
    }

    pub fn forward_encoded(&self, input: &EncodedInput) -> Result<[f64; 3], ModelError> {
        Ok(self.forward_trace(input)?.probs)
    }

    /// Class probabilities for one example.
    pub fn forward(
        &self,
        premise: &str,
        hypothesis: &str,
        fact_text: &str,
    ) -> Result<[f64; 3], ModelError> {
        self.forward_encoded(&self.encode_input(premise, hypothesis, fact_text))
    }

    /// Loss of one example; accumulates `scale · ∂loss/∂params` into `grads`.
    pub fn accumulate_gradient(
        &self,
        input: &EncodedInput,
        gold: Label,
        scale: f64,
        grads: &mut Params,
    ) -> Result<f64, ModelError> {
        let tr = self.forward_trace(input)?;
        let loss_value = loss(&tr.probs, gold);
        let g = gold.index();
        let mut d_logits = [0.0; 3];
        if tr.probs[g] > PROB_FLOOR {
            for (k, d) in d_logits.iter_mut().enumerate() {
                *d = scale * (tr.probs[k] - if k == g { 1.0 } else { 0.0 });
            }
        }
        let c = &self.params.classifier;
        let gc = &mut grads.classifier;
        axpy(1.0, &d_logits, &mut gc.b2);
        gc.w2.add_outer(1.0, &d_logits, &tr.hidden);
        let d_hidden = c.w2.transpose_mul_vec(&d_logits);
        let d_pre: Vec<f64> = d_hidden
            .iter()
            .zip(&tr.pre_relu)
            .map(|(d, &a)| if a > 0.0 { *d } else { 0.0 })
            .collect();
        axpy(1.0, &d_pre, &mut gc.b1);
        gc.w1.add_outer(1.0, &d_pre, &tr.z);
        let d_z = c.w1.transpose_mul_vec(&d_pre);
        let h = self.config.hidden_dim;
        self.params.nli.backward(
            &input.pair.ids,
            input.pair.length,
            &tr.nli,
            &d_z[..h],
            &mut grads.nli,
        );
        if let (Some(enc), Some(trace), Some(g_enc)) =
            (&self.params.fact, &tr.fact, &mut grads.fact)
        {
            enc.backward(&input.fact.ids, input.fact.length, trace, &d_z[h..], g_enc);
        }
        Ok(loss_value)
    }

    /// Mean loss over `batch` and its gradient.
    pub fn batch_loss_and_grad<'a, I>(&self, batch: I) -> Result<(f64, Params), ModelError>
    where
        I: IntoIterator<Item = &'a (EncodedInput, Label)>,
        I::IntoIter: ExactSizeIterator,
    {
        let batch = batch.into_iter();
        let mut grads = self.params.zeros_like();
        if batch.len() == 0 {
            return Ok((0.0, grads));
        }
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for (input, gold) in batch {
            total += self.accumulate_gradient(input, *gold, scale, &mut grads)?;
        }
        Ok((total * scale, grads))
    }

    pub fn batch_loss<'a, I>(&self, batch: I) -> Result<f64, ModelError>
    where
        I: IntoIterator<Item = &'a (EncodedInput, Label)>,
        I::IntoIter: ExactSizeIterator,
    {
        let batch = batch.into_iter();
        let n = batch.len();
        if n == 0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for (input, gold) in batch {
            total += loss(&self.forward_encoded(input)?, *gold);
        }
        Ok(total / n as f64)
    }

    /// Retrieves facts for the hypothesis, then classifies. Baseline models
    /// skip retrieval entirely.
    pub fn predict(
        &self,
        premise: &str,
        hypothesis: &str,
        kg: &KnowledgeGraph,
        stopwords: &StopwordList,
    ) -> Result<Prediction, ModelError> {
        let facts = match self.variant {
            Variant::Proposed => facts_for_hypothesis(hypothesis, kg, stopwords),
            Variant::Baseline => FactParagraph::default(),
        };
        let probs = self.forward(premise, hypothesis, facts.text())?;
        Ok(Prediction {
            label: argmax(&probs),
            probs,
            facts,
        })
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: [f64; 3]) -> [f64; 3] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e = logits.map(|l| libm::exp(l - max));
    let sum: f64 = e.iter().sum();
    e.map(|x| x / sum)
}

/// `−ln(max(probs[gold], 1e-12))`
pub fn loss(probs: &[f64; 3], gold: Label) -> f64 {
    -libm::log(probs[gold.index()].max(PROB_FLOOR))
}

/// Highest probability; ties go to the lowest label id.
pub fn argmax(probs: &[f64; 3]) -> Label {
    let mut best = 0;
    for k in 1..3 {
        if probs[k] > probs[best] {
            best = k;
        }
    }
    Label::ALL[best]
}
