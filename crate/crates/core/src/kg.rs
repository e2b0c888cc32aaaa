//! Triplet store with a case-insensitive source-entity index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// One directed, labeled edge `{source, relation, target}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    source: String,
    source_key: String,
    relation: String,
    target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TripletError {
    #[error("empty {0} field")]
    EmptyField(&'static str),
    #[error(
        "invalid relation label {0:?}: expected letter/digit groups joined by single underscores"
    )]
    InvalidRelation(String),
    #[error("tab character inside a label")]
    TabInLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KgError {
    #[error("line {line}: expected 3 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: {source}")]
    InvalidTriplet { line: usize, source: TripletError },
}

impl KgError {
    /// 1-based line number the error refers to.
    pub fn line(&self) -> usize {
        match self {
            KgError::ColumnCount { line, .. } | KgError::InvalidTriplet { line, .. } => *line,
        }
    }
}

/// Letter/digit groups separated by single underscores, e.g. `MEMILIKI_GEJALA`.
pub fn is_valid_relation(relation: &str) -> bool {
    !relation.is_empty()
        && relation
            .split('_')
            .all(|group| !group.is_empty() && group.chars().all(char::is_alphanumeric))
}

impl Triplet {
    pub fn new(source: &str, relation: &str, target: &str) -> Result<Self, TripletError> {
        let (source, relation, target) = (source.trim(), relation.trim(), target.trim());
        for (name, value) in [
            ("source", source),
            ("relation", relation),
            ("target", target),
        ] {
            if value.is_empty() {
                return Err(TripletError::EmptyField(name));
            }
            if value.contains('\t') {
                return Err(TripletError::TabInLabel);
            }
        }
        if !is_valid_relation(relation) {
            return Err(TripletError::InvalidRelation(relation.to_string()));
        }
        Ok(Triplet {
            source: source.to_string(),
            source_key: source.to_lowercase(),
            relation: relation.to_string(),
            target: target.to_string(),
        })
    }

    /// Source label with its original casing.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Lowercased source label used for lookups.
    pub fn source_key(&self) -> &str {
        &self.source_key
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn target(&self) -> &str {
        &self.target
    }
}

/// Immutable triplet list in file order plus an index from lowercased
/// source label to ascending triplet positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    triplets: Vec<Triplet>,
    source_index: BTreeMap<String, Vec<usize>>,
}

impl KnowledgeGraph {
    pub fn from_triplets(triplets: Vec<Triplet>) -> Self {
        let mut source_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (pos, t) in triplets.iter().enumerate() {
            source_index
                .entry(t.source_key.clone())
                .or_default()
                .push(pos);
        }
        KnowledgeGraph {
            triplets,
            source_index,
        }
    }

    /// Parses the TSV form: `source<TAB>relation<TAB>target` per line,
    /// `#` comments and blank lines skipped. Duplicates are kept.
    pub fn parse_tsv(text: &str) -> Result<Self, KgError> {
        let mut triplets = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(KgError::ColumnCount {
                    line: line_no,
                    found: cols.len(),
                });
            }
            let t = Triplet::new(cols[0], cols[1], cols[2]).map_err(|source| {
                KgError::InvalidTriplet {
                    line: line_no,
                    source,
                }
            })?;
            triplets.push(t);
        }
        Ok(Self::from_triplets(triplets))
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    /// Index bucket for `entity` (case-insensitive); empty when unknown.
    pub fn positions_for(&self, entity: &str) -> &[usize] {
        let key = entity.to_lowercase();
        self.source_index
            .get(&key)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains_source(&self, entity: &str) -> bool {
        !self.positions_for(entity).is_empty()
    }

    /// All triplets whose lowercased source equals lowercased `entity`, in file order.
    pub fn triplets_from_source(&self, entity: &str) -> Vec<&Triplet> {
        self.positions_for(entity)
            .iter()
            .map(|&p| &self.triplets[p])
            .collect()
    }

    pub fn source_entities(&self) -> impl Iterator<Item = &str> {
        self.source_index.keys().map(String::as_str)
    }

    /// Number of distinct entities appearing as source or target.
    pub fn entity_count(&self) -> usize {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for t in &self.triplets {
            seen.insert(&t.source);
            seen.insert(&t.target);
        }
        seen.len()
    }

    /// Number of triplets that repeat an earlier triplet verbatim.
    pub fn duplicate_count(&self) -> usize {
        let mut seen = BTreeSet::new();
        self.triplets.iter().filter(|t| !seen.insert(*t)).count()
    }

    /// Membership test with case-insensitive source and exact relation/target.
    pub fn contains(&self, source: &str, relation: &str, target: &str) -> bool {
        self.triplets_from_source(source)
            .iter()
            .any(|t| t.relation == relation && t.target == target)
    }

    /// Distinct targets in first-occurrence order.
    pub fn targets(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.triplets
            .iter()
            .map(|t| t.target.as_str())
            .filter(|t| seen.insert(*t))
            .collect()
    }

    /// Distinct targets of `relation` in first-occurrence order.
    pub fn relation_targets(&self, relation: &str) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.triplets
            .iter()
            .filter(|t| t.relation == relation)
            .map(|t| t.target.as_str())
            .filter(|t| seen.insert(*t))
            .collect()
    }
}
