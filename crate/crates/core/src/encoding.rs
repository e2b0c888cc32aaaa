//! Vocabulary, id encoding, and the mean-pool + affine + tanh sequence encoder.
//!
//! The encoder maps a padded id sequence to a fixed-size representation
//! vector `h = tanh(W · mean(E[ids[..length]]) + b)`. Mean pooling makes the
//! encoder blind to token order within the first `length` positions; this is
//! a known limitation of the toy encoder compared with transformer encoders.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::tensor::{axpy, uniform_vec, Matrix};
use crate::text::tokenize;

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const SEP: u32 = 2;
pub const RESERVED_TOKENS: [&str; 3] = ["[PAD]", "[UNK]", "[SEP]"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VocabError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("reserved token {expected} missing at id {id}")]
    MissingReserved { id: usize, expected: &'static str },
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
}

/// Dense token ↔ id mapping with `[PAD]=0`, `[UNK]=1`, `[SEP]=2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: BTreeMap<String, u32>,
}

impl Vocabulary {
    pub fn reserved_only() -> Self {
        Self::from_tokens(RESERVED_TOKENS.iter().map(|s| s.to_string()).collect())
            .expect("reserved tokens are distinct")
    }

    /// Rebuilds a vocabulary from its id-ordered token list.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, VocabError> {
        for (id, expected) in RESERVED_TOKENS.iter().enumerate() {
            if tokens.get(id).map(String::as_str) != Some(*expected) {
                return Err(VocabError::MissingReserved { id, expected });
            }
        }
        let mut ids = BTreeMap::new();
        for (id, tok) in tokens.iter().enumerate() {
            if ids.insert(tok.clone(), id as u32).is_some() {
                return Err(VocabError::DuplicateToken(tok.clone()));
            }
        }
        Ok(Vocabulary { tokens, ids })
    }

    /// Tokens with corpus frequency `>= min_freq`, in order of first occurrence.
    pub fn build<I, S>(corpus: I, min_freq: usize) -> Result<Self, VocabError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut order: Vec<String> = Vec::new();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut any = false;
        for text in corpus {
            any = true;
            for tok in tokenize(text.as_ref()) {
                let c = counts.entry(tok.clone()).or_insert(0);
                if *c == 0 {
                    order.push(tok);
                }
                *c += 1;
            }
        }
        if !any {
            return Err(VocabError::EmptyCorpus);
        }
        let mut vocab = Self::reserved_only();
        for tok in order {
            if counts[&tok] >= min_freq.max(1) && !vocab.ids.contains_key(&tok) {
                vocab.ids.insert(tok.clone(), vocab.tokens.len() as u32);
                vocab.tokens.push(tok);
            }
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(UNK)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    fn text_ids(&self, text: &str) -> Vec<u32> {
        tokenize(text).iter().map(|t| self.id(t)).collect()
    }

    pub fn encode_text(&self, text: &str, max_len: usize) -> EncodedSeq {
        EncodedSeq::fit(self.text_ids(text), max_len)
    }

    /// `tokens(premise) ++ [SEP] ++ tokens(hypothesis)`, truncated then padded.
    pub fn encode_pair(&self, premise: &str, hypothesis: &str, max_len: usize) -> EncodedSeq {
        let mut ids = self.text_ids(premise);
        ids.push(SEP);
        ids.extend(self.text_ids(hypothesis));
        EncodedSeq::fit(ids, max_len)
    }
}

/// Fixed-length id sequence plus the true (pre-padding) length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSeq {
    pub ids: Vec<u32>,
    pub length: usize,
}

impl EncodedSeq {
    fn fit(mut ids: Vec<u32>, max_len: usize) -> Self {
        ids.truncate(max_len);
        let length = ids.len();
        ids.resize(max_len, PAD);
        EncodedSeq { ids, length }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    IdOutOfRange { id: u32, vocab_size: usize },
    #[error("length {length} exceeds sequence of {len} ids")]
    LengthTooLong { length: usize, len: usize },
}

/// Embedding table `V × d_e`, projection `d_h × d_e`, bias `d_h`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub embedding: Matrix,
    pub projection: Matrix,
    pub bias: Vec<f64>,
}

/// Intermediate values kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderTrace {
    pub pooled: Vec<f64>,
    pub hidden: Vec<f64>,
}

impl EncoderParams {
    pub fn zeros(vocab_size: usize, embed_dim: usize, hidden_dim: usize) -> Self {
        EncoderParams {
            embedding: Matrix::zeros(vocab_size, embed_dim),
            projection: Matrix::zeros(hidden_dim, embed_dim),
            bias: vec![0.0; hidden_dim],
        }
    }

    pub fn uniform<R: Rng + ?Sized>(
        vocab_size: usize,
        embed_dim: usize,
        hidden_dim: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        EncoderParams {
            embedding: Matrix::uniform(vocab_size, embed_dim, scale, rng),
            projection: Matrix::uniform(hidden_dim, embed_dim, scale, rng),
            bias: uniform_vec(hidden_dim, scale, rng),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.bias.len()
    }

    pub fn shapes_consistent(&self) -> bool {
        self.projection.rows() == self.bias.len() && self.projection.cols() == self.embedding.cols()
    }

    fn check(&self, ids: &[u32], length: usize) -> Result<(), EncodeError> {
        if length > ids.len() {
            return Err(EncodeError::LengthTooLong {
                length,
                len: ids.len(),
            });
        }
        let vocab_size = self.vocab_size();
        match ids.iter().find(|&&id| id as usize >= vocab_size) {
            Some(&id) => Err(EncodeError::IdOutOfRange { id, vocab_size }),
            None => Ok(()),
        }
    }

    /// Mean of the non-PAD embeddings among the first `length` ids divided by
    /// `length`; the zero vector when `length == 0`.
    fn mean_pool(&self, ids: &[u32], length: usize) -> Vec<f64> {
        let mut pooled = vec![0.0; self.embed_dim()];
        if length == 0 {
            return pooled;
        }
        let inv = 1.0 / length as f64;
        for &id in ids[..length].iter().filter(|&&id| id != PAD) {
            axpy(inv, self.embedding.row(id as usize), &mut pooled);
        }
        pooled
    }

    pub fn forward(&self, ids: &[u32], length: usize) -> Result<EncoderTrace, EncodeError> {
        self.check(ids, length)?;
        let pooled = self.mean_pool(ids, length);
        let hidden = self
            .projection
            .mul_vec(&pooled)
            .into_iter()
            .zip(&self.bias)
            .map(|(z, b)| libm::tanh(z + b))
            .collect();
        Ok(EncoderTrace { pooled, hidden })
    }

    /// The representation vector for one sequence.
    pub fn encode_sequence(&self, ids: &[u32], length: usize) -> Result<Vec<f64>, EncodeError> {
        Ok(self.forward(ids, length)?.hidden)
    }

    /// Accumulates `∂L/∂params` into `grads` given `∂L/∂h`.
    pub fn backward(
        &self,
        ids: &[u32],
        length: usize,
        trace: &EncoderTrace,
        d_hidden: &[f64],
        grads: &mut EncoderParams,
    ) {
        let d_pre: Vec<f64> = d_hidden
            .iter()
            .zip(&trace.hidden)
            .map(|(g, h)| g * (1.0 - h * h))
            .collect();
        axpy(1.0, &d_pre, &mut grads.bias);
        grads.projection.add_outer(1.0, &d_pre, &trace.pooled);
        if length == 0 {
            return;
        }
        let d_pooled = self.projection.transpose_mul_vec(&d_pre);
        let inv = 1.0 / length as f64;
        for &id in ids[..length].iter().filter(|&&id| id != PAD) {
            axpy(inv, &d_pooled, grads.embedding.row_mut(id as usize));
        }
    }

    pub fn tensors(&self) -> [&[f64]; 3] {
        [
            self.embedding.as_slice(),
            self.projection.as_slice(),
            &self.bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 3] {
        [
            self.embedding.as_mut_slice(),
            self.projection.as_mut_slice(),
            &mut self.bias,
        ]
    }
}
