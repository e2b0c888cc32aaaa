//! Knowledge-graph augmented natural language inference for fact-checking.
//!
//! The pipeline retrieves triplets whose source entity appears in a
//! hypothesis, verbalizes them into a fact paragraph, and classifies the
//! `(premise, hypothesis, facts)` triple as entailment, contradiction or
//! neutral with a dual-encoder model whose two representation vectors are
//! concatenated and fed to an MLP.
//!
//! This crate is `no_std` and only needs `alloc`. File IO, checkpoints and
//! the command line live in the `factnli` crate.

#![no_std]
#![deny(rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod encoding;
pub mod kg;
pub mod knowledge;
pub mod metrics;
pub mod model;
pub mod prompt;
pub mod tensor;
pub mod text;
pub mod train;
pub mod wilcoxon;

pub use dataset::{Example, LabeledDataset, Provenance};
pub use encoding::{EncodedSeq, EncoderParams, Vocabulary};
pub use kg::{KnowledgeGraph, Triplet};
pub use knowledge::{facts_for_hypothesis, FactParagraph};
pub use metrics::Metrics;
pub use model::{Label, Model, ModelConfig, Variant};
pub use text::StopwordList;
pub use train::{TrainConfig, TrainHistory};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
