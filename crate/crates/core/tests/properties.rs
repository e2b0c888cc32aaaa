use std::collections::BTreeSet;

use factnli_core::dataset::{
    asserted_triplet, dedup, generate_kg_grounded, split, Example, LabeledDataset, Provenance,
};
use factnli_core::encoding::{EncoderParams, PAD};
use factnli_core::kg::{KnowledgeGraph, Triplet};
use factnli_core::knowledge::{facts_for_hypothesis, trace_facts, RetrievalOptions};
use factnli_core::metrics::Metrics;
use factnli_core::model::{softmax, Label};
use factnli_core::text::StopwordList;
use factnli_core::wilcoxon::wilcoxon_signed_rank;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ENTITIES: [&str; 8] = [
    "covid-19", "Covid-19", "flu", "batuk", "demam", "virus", "Obat", "pilek",
];
const RELATIONS: [&str; 3] = ["MEMILIKI_GEJALA", "DISEBABKAN_OLEH", "DIOBATI_DENGAN"];
const WORDS: [&str; 10] = [
    "covid-19", "flu", "batuk", "demam", "adalah", "yang", "virus", "obat", "pilek", "gejala",
];

fn triplets() -> impl Strategy<Value = Vec<Triplet>> {
    prop::collection::vec(
        (0..ENTITIES.len(), 0..RELATIONS.len(), 0..ENTITIES.len()),
        0..12,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(s, r, t)| Triplet::new(ENTITIES[s], RELATIONS[r], ENTITIES[t]).unwrap())
            .collect()
    })
}

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(0..WORDS.len(), 0..8).prop_map(|v| {
        v.into_iter()
            .map(|i| WORDS[i])
            .collect::<Vec<_>>()
            .join(" ")
    })
}

fn label() -> impl Strategy<Value = Label> {
    (0..3usize).prop_map(|i| Label::from_index(i).unwrap())
}

/// Reference retrieval: distinct query words in order, then every triplet
/// whose lowercased source equals the word, in file order.
fn scan_retrieve(words: &[String], triplets: &[Triplet]) -> Vec<Triplet> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for w in words {
        if !seen.insert(w.clone()) {
            continue;
        }
        out.extend(
            triplets
                .iter()
                .filter(|t| t.source().to_lowercase() == *w)
                .cloned(),
        );
    }
    out
}

proptest! {
    #[test]
    fn index_matches_linear_scan(ts in triplets(), q in 0..ENTITIES.len()) {
        let kg = KnowledgeGraph::from_triplets(ts.clone());
        let q = ENTITIES[q];
        let expected: Vec<&Triplet> = ts.iter().filter(|t| t.source().to_lowercase() == q.to_lowercase()).collect();
        prop_assert_eq!(kg.triplets_from_source(q), expected);
    }

    #[test]
    fn tsv_round_trip(ts in triplets()) {
        let text: String = ts.iter().map(|t| format!("{}\t{}\t{}\n", t.source(), t.relation(), t.target())).collect();
        let kg = KnowledgeGraph::parse_tsv(&text).unwrap();
        prop_assert_eq!(kg.triplets(), &ts[..]);
    }

    #[test]
    fn retrieval_matches_scan_and_is_local(ts in triplets(), text in sentence()) {
        let kg = KnowledgeGraph::from_triplets(ts.clone());
        let sw = StopwordList::default_indonesian();
        let trace = trace_facts(&text, &kg, &sw, RetrievalOptions::default());
        prop_assert_eq!(&trace.triplets, &scan_retrieve(&trace.words, &ts));
        for t in &trace.triplets {
            prop_assert!(trace.words.iter().any(|w| *w == t.source_key()));
        }
        prop_assert_eq!(trace.paragraph.len(), trace.triplets.len());
        prop_assert_eq!(trace.paragraph.is_empty(), trace.paragraph.text().is_empty());
        let again = facts_for_hypothesis(&text, &kg, &sw);
        prop_assert_eq!(again.text().as_bytes(), trace.paragraph.text().as_bytes());
    }

    #[test]
    fn more_stopwords_never_add_triplets(ts in triplets(), text in sentence(), extra in 0..WORDS.len()) {
        let kg = KnowledgeGraph::from_triplets(ts);
        let base = StopwordList::default_indonesian();
        let mut more = base.clone();
        more.insert(WORDS[extra]);
        let full = trace_facts(&text, &kg, &base, RetrievalOptions::default()).triplets;
        let fewer = trace_facts(&text, &kg, &more, RetrievalOptions::default()).triplets;
        // `fewer` must be a subsequence of `full`
        let mut it = full.iter();
        for t in &fewer {
            prop_assert!(it.any(|u| u == t));
        }
    }

    #[test]
    fn padding_does_not_change_encoding(
        seed in any::<u64>(),
        ids in prop::collection::vec(1u32..6, 0..6),
        pad in 0usize..5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let enc = EncoderParams::uniform(6, 3, 4, 1.5, &mut rng);
        let plain = enc.encode_sequence(&ids, ids.len()).unwrap();
        let mut padded = ids.clone();
        padded.extend(std::iter::repeat_n(PAD, pad));
        let h = enc.encode_sequence(&padded, ids.len()).unwrap();
        prop_assert_eq!(&plain, &h);
        prop_assert!(h.iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn softmax_is_a_distribution(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0) {
        let p = softmax([a, b, c]);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn dedup_is_idempotent(pairs in prop::collection::vec((0..4usize, 0..4usize, label()), 0..30)) {
        let d = LabeledDataset::new(
            pairs.iter().map(|&(p, h, l)| Example::new(format!("p{p}"), format!("h{h}"), l)).collect(),
            Provenance::Loaded,
        );
        let (once, report) = dedup(&d);
        let (twice, _) = dedup(&once);
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(report.kept + report.dropped, d.len());
        let keys: BTreeSet<_> = once.examples.iter().map(|e| (e.premise.clone(), e.hypothesis.clone())).collect();
        prop_assert_eq!(keys.len(), once.len());
    }

    #[test]
    fn generator_is_sound_and_deterministic(ts in triplets(), n in 1usize..15, seed in any::<u64>()) {
        let kg = KnowledgeGraph::from_triplets(ts);
        let Ok(d) = generate_kg_grounded(&kg, n, seed) else { return Ok(()); };
        prop_assert_eq!(&generate_kg_grounded(&kg, n, seed).unwrap(), &d);
        prop_assert_eq!(d.label_counts(), [n, n, n]);
        let sw = StopwordList::default_indonesian();
        for ex in &d.examples {
            let asserted: Vec<(String, &str, String)> = RELATIONS
                .iter()
                .filter_map(|r| asserted_triplet(&ex.hypothesis, r).map(|(s, t)| (s, *r, t)))
                .collect();
            prop_assert_eq!(asserted.len(), 1);
            let (s, r, t) = &asserted[0];
            let member = kg.contains(s, r, t);
            match ex.label {
                Label::Entailment => prop_assert!(member),
                Label::Contradiction => prop_assert!(!member),
                Label::Neutral => {
                    prop_assert!(!kg.contains_source(s));
                    prop_assert!(facts_for_hypothesis(&ex.hypothesis, &kg, &sw).is_empty());
                }
            }
        }
    }
}

fn brute_force(gold: &[Label], pred: &[Label]) -> (f64, f64, f64, f64) {
    let (mut p_sum, mut r_sum, mut f_sum) = (0.0, 0.0, 0.0);
    for c in Label::ALL {
        let tp = gold
            .iter()
            .zip(pred)
            .filter(|(g, p)| **g == c && **p == c)
            .count() as f64;
        let predicted = pred.iter().filter(|p| **p == c).count() as f64;
        let actual = gold.iter().filter(|g| **g == c).count() as f64;
        let p = if predicted > 0.0 { tp / predicted } else { 0.0 };
        let r = if actual > 0.0 { tp / actual } else { 0.0 };
        p_sum += p;
        r_sum += r;
        f_sum += if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        };
    }
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count() as f64;
    let acc = if gold.is_empty() {
        0.0
    } else {
        correct / gold.len() as f64
    };
    (p_sum / 3.0, r_sum / 3.0, f_sum / 3.0, acc)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn metrics_match_brute_force(pairs in prop::collection::vec((label(), label()), 0..60)) {
        let gold: Vec<Label> = pairs.iter().map(|p| p.0).collect();
        let pred: Vec<Label> = pairs.iter().map(|p| p.1).collect();
        let m = Metrics::from_predictions(&gold, &pred);
        let (p, r, f, a) = brute_force(&gold, &pred);
        prop_assert!((m.precision - p).abs() <= 1e-12);
        prop_assert!((m.recall - r).abs() <= 1e-12);
        prop_assert!((m.f1 - f).abs() <= 1e-12);
        prop_assert!((m.accuracy - a).abs() <= 1e-12);
        for c in Label::ALL {
            let tp = gold.iter().zip(&pred).filter(|(g, p)| **g == c && **p == c).count() as u64;
            prop_assert_eq!(m.per_class_true[c.index()], tp);
        }
    }

    #[test]
    fn wilcoxon_matches_enumeration(diffs in prop::collection::vec(-6i32..=6, 0..14)) {
        let pairs: Vec<(f64, f64)> = diffs.iter().map(|&d| (f64::from(d) * 0.25, 0.0)).collect();
        let res = wilcoxon_signed_rank(&pairs);
        let (n, w_plus, w_minus, p) = enumerate(&diffs);
        prop_assert_eq!(res.n_effective, n);
        if n <= 12 {
            prop_assert_eq!(res.w_plus, w_plus);
            prop_assert_eq!(res.w_minus, w_minus);
            prop_assert!((res.p_value - p).abs() <= 1e-12, "{} vs {}", res.p_value, p);
        }
    }
}

/// Exhaustive sign-flip distribution of the signed-rank statistic.
fn enumerate(diffs: &[i32]) -> (usize, f64, f64, f64) {
    let nz: Vec<i32> = diffs.iter().copied().filter(|&d| d != 0).collect();
    let n = nz.len();
    if n == 0 {
        return (0, 0.0, 0.0, 1.0);
    }
    let rank = |v: i32| {
        let below = nz.iter().filter(|d| d.abs() < v.abs()).count() as f64;
        let equal = nz.iter().filter(|d| d.abs() == v.abs()).count() as f64;
        below + (equal + 1.0) / 2.0
    };
    let ranks: Vec<f64> = nz.iter().map(|&d| rank(d)).collect();
    let w_plus: f64 = nz
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0)
        .map(|(_, r)| r)
        .sum();
    let total: f64 = ranks.iter().sum();
    let observed = w_plus.min(total - w_plus);
    let mut hits = 0u64;
    for mask in 0u32..(1 << n) {
        let wp: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .sum();
        if wp.min(total - wp) <= observed {
            hits += 1;
        }
    }
    (
        n,
        w_plus,
        total - w_plus,
        (hits as f64 / f64::from(1u32 << n)).min(1.0),
    )
}

#[test]
fn wilcoxon_one_two_three() {
    let res = wilcoxon_signed_rank(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
    assert_eq!(res.p_value, 0.25);
}

fn split_oracle(n: usize) -> (usize, usize, usize) {
    let test = n * 20 / 100;
    let rest = n - test;
    let val = rest * 20 / 100;
    (rest - val, val, test)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_partitions_input(n in 5usize..=10_000, seed in any::<u64>()) {
        let d = LabeledDataset::new(
            (0..n).map(|i| Example::new(format!("p{i}"), "h", Label::from_index(i % 3).unwrap())).collect(),
            Provenance::Loaded,
        );
        let s = split(&d, seed, false).unwrap();
        prop_assert_eq!((s.train.len(), s.val.len(), s.test.len()), split_oracle(n));
        let mut all: Vec<&str> = s.train.iter().chain(&s.val).chain(&s.test).map(|e| e.premise.as_str()).collect();
        all.sort_unstable();
        let mut expected: Vec<&str> = d.examples.iter().map(|e| e.premise.as_str()).collect();
        expected.sort_unstable();
        prop_assert_eq!(all, expected);
    }

    #[test]
    fn stratified_split_applies_rule_per_class(per_class in prop::array::uniform3(7usize..400), seed in any::<u64>()) {
        let mut examples = Vec::new();
        for (c, &k) in per_class.iter().enumerate() {
            examples.extend((0..k).map(|i| Example::new(format!("p{c}-{i}"), "h", Label::from_index(c).unwrap())));
        }
        let d = LabeledDataset::new(examples, Provenance::Loaded);
        let s = split(&d, seed, true).unwrap();
        for c in Label::ALL {
            let count = |part: &[Example]| part.iter().filter(|e| e.label == c).count();
            let (tr, va, te) = split_oracle(per_class[c.index()]);
            prop_assert_eq!((count(&s.train), count(&s.val), count(&s.test)), (tr, va, te));
        }
    }
}

#[test]
fn stratified_split_rejects_class_with_empty_part() {
    let examples = (0..15)
        .map(|i| Example::new(format!("p{i}"), "h", Label::from_index(i % 3).unwrap()))
        .collect();
    let d = LabeledDataset::new(examples, Provenance::Loaded);
    assert!(split(&d, 0, true).is_err());
    assert!(split(&d, 0, false).is_ok());
}
