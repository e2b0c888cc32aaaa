//! Prompt templates for remote dataset generation and parsers for the
//! replies. Placeholders: `{s}` input sentence, `{n}` number of sentences,
//! `{l}` maximum words per sentence.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use crate::model::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Entailment,
    Neutral,
    Contradiction,
    Paraphrase,
}

impl TaskKind {
    pub fn label(self) -> Option<Label> {
        match self {
            TaskKind::Entailment => Some(Label::Entailment),
            TaskKind::Neutral => Some(Label::Neutral),
            TaskKind::Contradiction => Some(Label::Contradiction),
            TaskKind::Paraphrase => None,
        }
    }

    pub fn required_placeholders(self) -> &'static [&'static str] {
        match self {
            TaskKind::Paraphrase => &["{s}", "{l}"],
            _ => &["{s}", "{n}", "{l}"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Entailment => "entailment",
            TaskKind::Neutral => "neutral",
            TaskKind::Contradiction => "contradiction",
            TaskKind::Paraphrase => "paraphrase",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} template is missing placeholder {placeholder}")]
pub struct TemplateError {
    pub kind: TaskKind,
    pub placeholder: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenTemplate {
    kind: TaskKind,
    text: String,
}

impl GenTemplate {
    pub fn new(kind: TaskKind, text: impl Into<String>) -> Result<Self, TemplateError> {
        let text = text.into();
        if let Some(p) = kind
            .required_placeholders()
            .iter()
            .find(|p| !text.contains(*p))
        {
            return Err(TemplateError {
                kind,
                placeholder: p,
            });
        }
        Ok(GenTemplate { kind, text })
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn render(&self, sentence: &str, count: usize, max_words: usize) -> String {
        self.text
            .replace("{n}", &count.to_string())
            .replace("{l}", &max_words.to_string())
            .replace("{s}", sentence)
    }
}

const ENTAILMENT_PROMPT: &str = "Buatkan daftar (1,2,3,...) {n} kalimat yang berhubungan dengan pernyataan '{s}' tidak lebih dari {l} kata berbahasa Indonesia menggunakan EYD! Kalimat tidak mengandung unsur organisasi, politik, nama tokoh, dan SARA!";
const NEUTRAL_PROMPT: &str = "Buatkan daftar (1,2,3,...) {n} kalimat yang netral (tidak berhubungan) dengan pernyataan '{s}' tidak lebih dari {l} kata berbahasa Indonesia menggunakan EYD! Kalimat tidak mengandung unsur organisasi, politik, nama tokoh, dan SARA!";
const CONTRADICTION_PROMPT: &str = "Buatkan daftar (1,2,3,...) {n} kalimat yang bertentangan dengan pernyataan '{s}' tidak lebih dari {l} kata berbahasa Indonesia menggunakan EYD! Kalimat tidak mengandung unsur organisasi, politik, nama tokoh, dan SARA!";
const PARAPHRASE_PROMPT: &str = "Parafrase menjadi kalimat berita untuk awam maksimal {l} kata yang tidak boleh sama persis ataupun sebagian dengan hasil parafrase sebelumnya.: '{s}'";

/// The four Indonesian generation prompts: paraphrase, entailment, neutral, contradiction.
pub fn default_templates() -> Vec<GenTemplate> {
    [
        (TaskKind::Paraphrase, PARAPHRASE_PROMPT),
        (TaskKind::Entailment, ENTAILMENT_PROMPT),
        (TaskKind::Neutral, NEUTRAL_PROMPT),
        (TaskKind::Contradiction, CONTRADICTION_PROMPT),
    ]
    .into_iter()
    .map(|(k, t)| GenTemplate::new(k, t).expect("built-in templates are complete"))
    .collect()
}

/// Items of a numbered list (`1. text` or `1) text`), in order. Lines that are
/// not numbered items are ignored.
pub fn parse_numbered_list(response: &str) -> Vec<String> {
    response
        .lines()
        .filter_map(|line| {
            let line = line.trim();
            let digits = line.chars().take_while(char::is_ascii_digit).count();
            if digits == 0 {
                return None;
            }
            let rest = &line[digits..];
            let rest = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')'))?;
            if !rest.starts_with(char::is_whitespace) {
                return None;
            }
            let item = rest.trim();
            (!item.is_empty()).then(|| item.to_string())
        })
        .collect()
}

/// A single paraphrase reply: trimmed, with one layer of matching quotes removed.
pub fn parse_paraphrase(response: &str) -> Option<String> {
    let mut s = response.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('“', '”')] {
        if s.len() >= 2 && s.starts_with(open) && s.ends_with(close) {
            s = s[open.len_utf8()..s.len() - close.len_utf8()].trim();
            break;
        }
    }
    (!s.is_empty()).then(|| s.to_string())
}
