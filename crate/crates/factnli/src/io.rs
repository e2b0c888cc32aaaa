//! Readers and writers for the on-disk formats: KG TSV, stopword lists and
//! JSON-lines datasets.

use std::fs;
use std::path::Path;

use factnli_core::dataset::{Example, LabeledDataset, Provenance};
use factnli_core::kg::KnowledgeGraph;
use factnli_core::model::Label;
use factnli_core::text::StopwordList;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_kg(path: &Path) -> Result<KnowledgeGraph> {
    KnowledgeGraph::parse_tsv(&read_text(path)?).map_err(|source| Error::Kg {
        path: path.to_path_buf(),
        source,
    })
}

/// `None` selects the bundled Indonesian list.
pub fn load_stopwords(path: Option<&Path>) -> Result<StopwordList> {
    match path {
        None => Ok(StopwordList::default_indonesian()),
        Some(path) => StopwordList::parse(&read_text(path)?).map_err(|source| Error::Stopwords {
            path: path.to_path_buf(),
            source,
        }),
    }
}

#[derive(Deserialize)]
struct RawExample {
    premise: String,
    hypothesis: String,
    label: String,
}

#[derive(Serialize)]
struct ExampleLine<'a> {
    premise: &'a str,
    hypothesis: &'a str,
    label: Label,
}

/// Parse error with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// One JSON object per line with keys `premise`, `hypothesis`, `label`.
/// Labels are matched case-insensitively. Blank lines are skipped.
pub fn parse_jsonl(text: &str) -> std::result::Result<Vec<Example>, LineError> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| LineError {
            line: idx + 1,
            message,
        };
        let raw: RawExample = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        let label: Label = raw
            .label
            .parse()
            .map_err(|e: factnli_core::model::UnknownLabel| err(e.to_string()))?;
        let ex = Example::new(raw.premise, raw.hypothesis, label);
        if !ex.is_valid() {
            return Err(err("premise and hypothesis must be non-empty".into()));
        }
        out.push(ex);
    }
    Ok(out)
}

pub fn to_jsonl(examples: &[Example]) -> String {
    let mut out = String::new();
    for ex in examples {
        let line = ExampleLine {
            premise: &ex.premise,
            hypothesis: &ex.hypothesis,
            label: ex.label,
        };
        out.push_str(&serde_json::to_string(&line).expect("example serializes"));
        out.push('\n');
    }
    out
}

pub fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    let examples = parse_jsonl(&read_text(path)?).map_err(|e| Error::Dataset {
        path: path.to_path_buf(),
        line: e.line,
        message: e.message,
    })?;
    Ok(LabeledDataset::new(examples, Provenance::Loaded))
}

pub fn save_dataset(path: &Path, examples: &[Example]) -> Result<()> {
    write_text(path, &to_jsonl(examples))
}
