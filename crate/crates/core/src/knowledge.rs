//! Word-matching retrieval: hypothesis → words → matched source entities →
//! triplets → fact sentences → fact paragraph.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::kg::{KnowledgeGraph, Triplet};
use crate::text::{tokenize, StopwordList};

/// Ordered fact sentences, the triplets they came from, and the joined text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactParagraph {
    sentences: Vec<String>,
    provenance: Vec<Triplet>,
    text: String,
}

impl FactParagraph {
    pub fn from_triplets(triplets: Vec<Triplet>) -> Self {
        let sentences: Vec<String> = triplets.iter().map(verbalize_triplet).collect();
        let text = build_fact_paragraph(&sentences);
        FactParagraph {
            sentences,
            provenance: triplets,
            text,
        }
    }

    pub fn sentences(&self) -> &[String] {
        &self.sentences
    }

    pub fn provenance(&self) -> &[Triplet] {
        &self.provenance
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }
}

/// Every intermediate stage of one retrieval, for verbose reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalTrace {
    pub words: Vec<String>,
    pub entities: Vec<String>,
    pub triplets: Vec<Triplet>,
    pub paragraph: FactParagraph,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RetrievalOptions {
    /// Drop repeated triplets before verbalizing. Off by default.
    pub dedup_triplets: bool,
}

/// Tokenizes and removes stopwords, preserving order and repeats.
pub fn preprocess_query(text: &str, stopwords: &StopwordList) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|w| !stopwords.contains(w))
        .collect()
}

/// Words that name a source entity, each entity kept once at its first occurrence.
pub fn match_entities<S: AsRef<str>>(words: &[S], kg: &KnowledgeGraph) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut entities = Vec::new();
    for word in words {
        let word = word.as_ref();
        if kg.contains_source(word) && seen.insert(word) {
            entities.push(String::from(word));
        }
    }
    entities
}

pub fn retrieve_triplets<S: AsRef<str>>(entities: &[S], kg: &KnowledgeGraph) -> Vec<Triplet> {
    entities
        .iter()
        .flat_map(|e| kg.triplets_from_source(e.as_ref()))
        .cloned()
        .collect()
}

/// `source + " " + relation lowercased with underscores as spaces + " " + target`.
pub fn verbalize_triplet(t: &Triplet) -> String {
    let relation = t.relation().to_lowercase().replace('_', " ");
    let mut out = String::with_capacity(t.source().len() + relation.len() + t.target().len() + 2);
    out.push_str(t.source());
    out.push(' ');
    out.push_str(&relation);
    out.push(' ');
    out.push_str(t.target());
    out
}

fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Joins with `". "` and a final `"."`; every sentence after the first gets
/// its first character uppercased. An empty list gives `""`.
pub fn build_fact_paragraph<S: AsRef<str>>(sentences: &[S]) -> String {
    let mut out = String::new();
    for (i, s) in sentences.iter().enumerate() {
        if i == 0 {
            out.push_str(s.as_ref());
        } else {
            out.push_str(". ");
            out.push_str(&capitalize_first(s.as_ref()));
        }
    }
    if !sentences.is_empty() {
        out.push('.');
    }
    out
}

pub fn trace_facts(
    text: &str,
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
    options: RetrievalOptions,
) -> RetrievalTrace {
    let words = preprocess_query(text, stopwords);
    let entities = match_entities(&words, kg);
    let mut triplets = retrieve_triplets(&entities, kg);
    if options.dedup_triplets {
        let mut seen = BTreeSet::new();
        triplets.retain(|t| seen.insert(t.clone()));
    }
    let paragraph = FactParagraph::from_triplets(triplets.clone());
    RetrievalTrace {
        words,
        entities,
        triplets,
        paragraph,
    }
}

/// Retrieves the fact paragraph for a hypothesis. Total: the worst case is an
/// empty paragraph.
pub fn facts_for_hypothesis(
    text: &str,
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
) -> FactParagraph {
    trace_facts(text, kg, stopwords, RetrievalOptions::default()).paragraph
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn covid_kg() -> KnowledgeGraph {
        KnowledgeGraph::parse_tsv(
            "covid-19\tDISEBABKAN_OLEH\tsars-cov-2\ncovid-19\tMEMILIKI_GEJALA\tbatuk\n",
        )
        .unwrap()
    }

    fn tri(s: &str, r: &str, t: &str) -> Triplet {
        Triplet::new(s, r, t).unwrap()
    }

    #[test]
    fn preprocess_table_row() {
        let sw = StopwordList::default_indonesian();
        assert_eq!(
            preprocess_query("Salah satu gejala Covid-19 adalah batuk", &sw),
            vec!["salah", "satu", "gejala", "covid-19", "batuk"]
        );
        assert!(preprocess_query("", &sw).is_empty());
        assert!(preprocess_query("adalah yang dan", &sw).is_empty());
    }

    #[test]
    fn edge_punctuation_does_not_block_match() {
        let kg = KnowledgeGraph::parse_tsv("batuk\tGEJALA_DARI\tcovid-19\n").unwrap();
        let p = facts_for_hypothesis("Apakah ini batuk?", &kg, &StopwordList::empty());
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn match_entities_dedups_in_first_occurrence_order() {
        let kg = KnowledgeGraph::parse_tsv("b\tR\tx\na\tR\ty\n").unwrap();
        assert_eq!(
            match_entities(&["covid-19", "covid-19"], &covid_kg()),
            vec!["covid-19"]
        );
        assert_eq!(match_entities(&["a", "z", "b", "a"], &kg), vec!["a", "b"]);
        assert!(match_entities::<&str>(&[], &kg).is_empty());
    }

    #[test]
    fn retrieve_follows_entity_order() {
        let kg = KnowledgeGraph::parse_tsv("b\tR\tx\na\tR\ty\n").unwrap();
        let got = retrieve_triplets(&["a", "b"], &kg);
        assert_eq!(got, vec![tri("a", "R", "y"), tri("b", "R", "x")]);
        assert!(retrieve_triplets::<&str>(&[], &kg).is_empty());
    }

    #[test]
    fn verbalize_examples() {
        assert_eq!(
            verbalize_triplet(&tri("COVID-19", "HAVE_SYMPTOM", "cough")),
            "COVID-19 have symptom cough"
        );
        assert_eq!(
            verbalize_triplet(&tri("covid-19", "MEMILIKI_GEJALA", "batuk")),
            "covid-19 memiliki gejala batuk"
        );
        assert_eq!(verbalize_triplet(&tri("a", "R", "b")), "a r b");
    }

    #[test]
    fn paragraph_join_rule() {
        assert_eq!(
            build_fact_paragraph(&[
                "covid-19 disebabkan oleh sars-cov-2",
                "covid-19 memiliki gejala batuk"
            ]),
            "covid-19 disebabkan oleh sars-cov-2. Covid-19 memiliki gejala batuk."
        );
        assert_eq!(build_fact_paragraph::<&str>(&[]), "");
        assert_eq!(build_fact_paragraph(&["a r b"]), "a r b.");
        assert_eq!(build_fact_paragraph(&["x", "ékstra"]), "x. Ékstra.");
    }

    #[test]
    fn end_to_end_table() {
        let sw = StopwordList::default_indonesian();
        let p = facts_for_hypothesis("Salah satu gejala Covid-19 adalah batuk", &covid_kg(), &sw);
        assert_eq!(
            p.text(),
            "covid-19 disebabkan oleh sars-cov-2. Covid-19 memiliki gejala batuk."
        );
        assert_eq!(p.provenance().len(), 2);
        assert!(facts_for_hypothesis("", &covid_kg(), &sw).is_empty());
        let none = facts_for_hypothesis("vaksin tersedia gratis", &covid_kg(), &sw);
        assert!(none.is_empty());
        assert_eq!(none.text(), "");
    }

    #[test]
    fn optional_triplet_dedup() {
        let kg = KnowledgeGraph::parse_tsv("a\tR\tb\na\tR\tb\n").unwrap();
        let sw = StopwordList::empty();
        assert_eq!(facts_for_hypothesis("a", &kg, &sw).text(), "a r b. A r b.");
        let opts = RetrievalOptions {
            dedup_triplets: true,
        };
        assert_eq!(trace_facts("a", &kg, &sw, opts).paragraph.text(), "a r b.");
    }
}
