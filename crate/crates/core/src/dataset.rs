//! Labeled premise/hypothesis datasets: dedup, two-stage 80:20 splitting, and
//! an offline generator whose labels can only be decided from the KG.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::kg::{KnowledgeGraph, Triplet};
use crate::knowledge::verbalize_triplet;
use crate::model::Label;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Example {
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
}

impl Example {
    pub fn new(premise: impl Into<String>, hypothesis: impl Into<String>, label: Label) -> Self {
        Example {
            premise: premise.into(),
            hypothesis: hypothesis.into(),
            label,
        }
    }

    pub fn is_valid(&self) -> bool {
        !self.premise.trim().is_empty() && !self.hypothesis.trim().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Loaded,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub examples: Vec<Example>,
    pub provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(examples: Vec<Example>, provenance: Provenance) -> Self {
        LabeledDataset {
            examples,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn label_counts(&self) -> [usize; 3] {
        label_counts(&self.examples)
    }
}

pub fn label_counts(examples: &[Example]) -> [usize; 3] {
    let mut counts = [0; 3];
    for e in examples {
        counts[e.label.index()] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupReport {
    pub kept: usize,
    pub dropped: usize,
    /// Dropped duplicates whose label differed from the kept one.
    pub conflicts: usize,
}

/// Keeps the first example of each `(premise, hypothesis)` pair, compared after trimming.
pub fn dedup(d: &LabeledDataset) -> (LabeledDataset, DedupReport) {
    let mut first_label: BTreeMap<(&str, &str), Label> = BTreeMap::new();
    let mut examples = Vec::new();
    let mut report = DedupReport::default();
    for ex in &d.examples {
        let key = (ex.premise.trim(), ex.hypothesis.trim());
        match first_label.get(&key) {
            Some(&label) => {
                report.dropped += 1;
                if label != ex.label {
                    report.conflicts += 1;
                }
            }
            None => {
                first_label.insert(key, ex.label);
                examples.push(ex.clone());
            }
        }
    }
    report.kept = examples.len();
    (LabeledDataset::new(examples, d.provenance), report)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("need at least 5 examples to split, got {0}")]
    TooSmall(usize),
    #[error("class {label} has {count} examples, too few for one per split part")]
    ClassTooSmall { label: Label, count: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<Example>,
    pub val: Vec<Example>,
    pub test: Vec<Example>,
}

/// `(train, val, test)` sizes: test = ⌊0.2·n⌋, val = ⌊0.2·(n − test)⌋, train = rest.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let test = n / 5;
    let rest = n - test;
    let val = rest / 5;
    (rest - val, val, test)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Train,
    Val,
    Test,
}

/// Seeded shuffle, then the two-stage 80:20 cut, either globally or per label.
pub fn split(d: &LabeledDataset, seed: u64, stratified: bool) -> Result<Split, SplitError> {
    let n = d.len();
    if n < 5 {
        return Err(SplitError::TooSmall(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut part = alloc::vec![Part::Train; n];
    let mut assign = |members: &[usize]| {
        let (_, val, test) = split_sizes(members.len());
        for (k, &i) in members.iter().enumerate() {
            part[i] = if k < test {
                Part::Test
            } else if k < test + val {
                Part::Val
            } else {
                Part::Train
            };
        }
    };
    if stratified {
        for label in Label::ALL {
            let members: Vec<usize> = order
                .iter()
                .copied()
                .filter(|&i| d.examples[i].label == label)
                .collect();
            if members.is_empty() {
                continue;
            }
            let (train, val, test) = split_sizes(members.len());
            if train == 0 || val == 0 || test == 0 {
                return Err(SplitError::ClassTooSmall {
                    label,
                    count: members.len(),
                });
            }
            assign(&members);
        }
    } else {
        assign(&order);
    }

    let collect = |p: Part| -> Vec<Example> {
        order
            .iter()
            .filter(|&&i| part[i] == p)
            .map(|&i| d.examples[i].clone())
            .collect()
    };
    Ok(Split {
        train: collect(Part::Train),
        val: collect(Part::Val),
        test: collect(Part::Test),
    })
}

/// Uninformative premises shared by every label of the synthetic task.
pub const FILLER_PREMISES: [&str; 6] = [
    "Pernyataan berikut perlu diperiksa kebenarannya.",
    "Informasi ini beredar luas di media sosial.",
    "Seorang warganet membagikan kabar tersebut kemarin.",
    "Klaim berikut ditemukan dalam sebuah pesan berantai.",
    "Kabar ini diteruskan dari grup percakapan keluarga.",
    "Berita tersebut belum dikonfirmasi oleh pihak berwenang.",
];

const SYLLABLES: [&str; 20] = [
    "ka", "li", "mo", "ra", "te", "su", "no", "pi", "da", "ge", "lu", "wa", "si", "ko", "ba", "re",
    "tu", "ma", "ni", "jo",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("knowledge graph is empty")]
    EmptyGraph,
    #[error("knowledge graph is too small to sample contradictions: {0}")]
    NoContradiction(String),
    #[error("no triplet yields a neutral hypothesis free of KG source entities")]
    NoNeutral,
}

/// Endless stream of triplet positions: repeated independent shuffled passes.
struct TripletStream {
    order: Vec<usize>,
    next: usize,
}

impl TripletStream {
    fn new(len: usize) -> Self {
        TripletStream {
            order: (0..len).collect(),
            next: len,
        }
    }

    fn draw<R: Rng>(&mut self, rng: &mut R) -> usize {
        if self.next == self.order.len() {
            self.order.shuffle(rng);
            self.next = 0;
        }
        self.next += 1;
        self.order[self.next - 1]
    }
}

/// Targets `t′` such that `(s, r, t′)` is not in the KG, preferring the
/// range of `r` and falling back to every KG target.
fn contradiction_candidates<'a>(kg: &'a KnowledgeGraph, t: &Triplet) -> Vec<&'a str> {
    let related: BTreeSet<&str> = kg
        .triplets_from_source(t.source_key())
        .into_iter()
        .filter(|x| x.relation() == t.relation())
        .map(|x| x.target())
        .collect();
    let same_range: Vec<&str> = kg
        .relation_targets(t.relation())
        .into_iter()
        .filter(|c| !related.contains(c))
        .collect();
    if !same_range.is_empty() {
        return same_range;
    }
    kg.targets()
        .into_iter()
        .filter(|c| !related.contains(c))
        .collect()
}

fn invent_entity<R: Rng>(rng: &mut R, kg: &KnowledgeGraph, used: &mut BTreeSet<String>) -> String {
    loop {
        let syllables = rng.random_range(3..=5);
        let mut name = String::new();
        for _ in 0..syllables {
            name.push_str(SYLLABLES[rng.random_range(0..SYLLABLES.len())]);
        }
        if !kg.contains_source(&name) && used.insert(name.clone()) {
            return name;
        }
    }
}

fn humanize(relation: &str) -> String {
    relation.to_lowercase().replace('_', " ")
}

/// Synthetic task decidable only through the KG:
///
/// * entailment: the verbalized KG triplet `s r t`;
/// * contradiction: `s r t′` where `(s, r, t′)` is not in the KG;
/// * neutral: `x r t` for an invented entity `x` that is not a KG source,
///   so retrieval returns an empty paragraph.
///
/// Premises are filler sentences drawn independently of the label.
/// Entailment and contradiction draw from one shared shuffled-pass stream of
/// triplets, so a KG with at least `2·n_per_label` triplets uses each source
/// triplet at most once. Output is interleaved E, C, N.
pub fn generate_kg_grounded(
    kg: &KnowledgeGraph,
    n_per_label: usize,
    seed: u64,
) -> Result<LabeledDataset, GenerateError> {
    if kg.is_empty() {
        return Err(GenerateError::EmptyGraph);
    }
    let usable: Vec<bool> = kg
        .triplets()
        .iter()
        .map(|t| !contradiction_candidates(kg, t).is_empty())
        .collect();
    if !usable.iter().any(|&u| u) {
        return Err(GenerateError::NoContradiction(format!(
            "every triplet's source is already related to all {} targets",
            kg.targets().len()
        )));
    }
    let neutral_ok: Vec<bool> = kg
        .triplets()
        .iter()
        .map(|t| {
            tokenize(&humanize(t.relation()))
                .iter()
                .chain(tokenize(t.target()).iter())
                .all(|w| !kg.contains_source(w))
        })
        .collect();
    if !neutral_ok.iter().any(|&u| u) {
        return Err(GenerateError::NoNeutral);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = TripletStream::new(kg.len());
    let mut neutral_stream = TripletStream::new(kg.len());
    let mut invented = BTreeSet::new();
    let premise =
        |rng: &mut ChaCha8Rng| FILLER_PREMISES[rng.random_range(0..FILLER_PREMISES.len())];

    let mut examples = Vec::with_capacity(3 * n_per_label);
    for _ in 0..n_per_label {
        let e = &kg.triplets()[stream.draw(&mut rng)];
        examples.push(Example::new(
            premise(&mut rng),
            verbalize_triplet(e),
            Label::Entailment,
        ));

        let c = loop {
            let pos = stream.draw(&mut rng);
            if usable[pos] {
                break &kg.triplets()[pos];
            }
        };
        let candidates = contradiction_candidates(kg, c);
        let wrong = candidates[rng.random_range(0..candidates.len())];
        let hypothesis = format!("{} {} {}", c.source(), humanize(c.relation()), wrong);
        examples.push(Example::new(
            premise(&mut rng),
            hypothesis,
            Label::Contradiction,
        ));

        let n = loop {
            let pos = neutral_stream.draw(&mut rng);
            if neutral_ok[pos] {
                break &kg.triplets()[pos];
            }
        };
        let entity = invent_entity(&mut rng, kg, &mut invented);
        let hypothesis = format!("{} {} {}", entity, humanize(n.relation()), n.target());
        examples.push(Example::new(premise(&mut rng), hypothesis, Label::Neutral));
    }
    Ok(LabeledDataset::new(examples, Provenance::Generated))
}

/// Parses a `source relation-words target` hypothesis produced by
/// [`generate_kg_grounded`] back into the asserted `(source, relation, target)`,
/// given the relation label it was built from.
pub fn asserted_triplet(hypothesis: &str, relation: &str) -> Option<(String, String)> {
    let needle = format!(" {} ", humanize(relation));
    let at = hypothesis.find(&needle)?;
    Some((
        hypothesis[..at].to_string(),
        hypothesis[at + needle.len()..].to_string(),
    ))
}
