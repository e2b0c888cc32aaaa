//! Confusion matrix, macro precision/recall/F1, accuracy, and the paired
//! baseline-vs-proposed comparison.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::dataset::Example;
use crate::kg::KnowledgeGraph;
use crate::model::{Label, Model, ModelError};
use crate::text::StopwordList;
use crate::wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};

/// Rows are gold labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: [[u64; 3]; 3],
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Correct predictions per class, i.e. the confusion diagonal.
    pub per_class_true: [u64; 3],
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_confusion(confusion: [[u64; 3]; 3]) -> Self {
        let total: u64 = confusion.iter().flatten().sum();
        let tp = |c: usize| confusion[c][c];
        let predicted = |c: usize| (0..3).map(|g| confusion[g][c]).sum::<u64>();
        let actual = |c: usize| confusion[c].iter().sum::<u64>();

        let mut p_sum = 0.0;
        let mut r_sum = 0.0;
        let mut f_sum = 0.0;
        for c in 0..3 {
            let p = ratio(tp(c), predicted(c));
            let r = ratio(tp(c), actual(c));
            p_sum += p;
            r_sum += r;
            f_sum += if p + r == 0.0 {
                0.0
            } else {
                2.0 * p * r / (p + r)
            };
        }
        let per_class_true = [tp(0), tp(1), tp(2)];
        Metrics {
            confusion,
            precision: p_sum / 3.0,
            recall: r_sum / 3.0,
            f1: f_sum / 3.0,
            accuracy: ratio(per_class_true.iter().sum(), total),
            per_class_true,
        }
    }

    /// `gold` and `predicted` are zipped; extra entries in either are ignored.
    pub fn from_predictions(gold: &[Label], predicted: &[Label]) -> Self {
        let mut confusion = [[0u64; 3]; 3];
        for (g, p) in gold.iter().zip(predicted) {
            confusion[g.index()][p.index()] += 1;
        }
        Self::from_confusion(confusion)
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }
}

/// Predicted labels for every example, in order.
pub fn predict_all(
    model: &Model,
    dataset: &[Example],
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
) -> Result<Vec<Label>, ModelError> {
    dataset
        .iter()
        .map(|ex| {
            Ok(model
                .predict(&ex.premise, &ex.hypothesis, kg, stopwords)?
                .label)
        })
        .collect()
}

pub fn evaluate(
    model: &Model,
    dataset: &[Example],
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
) -> Result<Metrics, ModelError> {
    let predicted = predict_all(model, dataset, kg, stopwords)?;
    let gold: Vec<Label> = dataset.iter().map(|e| e.label).collect();
    Ok(Metrics::from_predictions(&gold, &predicted))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: Metrics,
    pub proposed: Metrics,
    pub block_size: usize,
    /// Per-block `(proposed accuracy, baseline accuracy)` in test-set order.
    pub block_accuracies: Vec<(f64, f64)>,
    /// Signed-rank test on `proposed − baseline` block accuracies.
    pub wilcoxon: WilcoxonResult,
}

fn block_accuracy(gold: &[Label], predicted: &[Label]) -> f64 {
    let correct = gold.iter().zip(predicted).filter(|(g, p)| g == p).count();
    correct as f64 / gold.len() as f64
}

/// Accuracy pairs over consecutive blocks of `block_size` (last block may be short).
pub fn paired_block_accuracies(
    gold: &[Label],
    proposed: &[Label],
    baseline: &[Label],
    block_size: usize,
) -> Vec<(f64, f64)> {
    let block_size = block_size.max(1);
    gold.chunks(block_size)
        .zip(proposed.chunks(block_size))
        .zip(baseline.chunks(block_size))
        .map(|((g, p), b)| (block_accuracy(g, p), block_accuracy(g, b)))
        .collect()
}

pub fn compare_models(
    baseline: &Model,
    proposed: &Model,
    test_set: &[Example],
    kg: &KnowledgeGraph,
    stopwords: &StopwordList,
    block_size: usize,
) -> Result<Comparison, ModelError> {
    let gold: Vec<Label> = test_set.iter().map(|e| e.label).collect();
    let base_pred = predict_all(baseline, test_set, kg, stopwords)?;
    let prop_pred = predict_all(proposed, test_set, kg, stopwords)?;
    let block_accuracies = paired_block_accuracies(&gold, &prop_pred, &base_pred, block_size);
    Ok(Comparison {
        baseline: Metrics::from_predictions(&gold, &base_pred),
        proposed: Metrics::from_predictions(&gold, &prop_pred),
        block_size: block_size.max(1),
        wilcoxon: wilcoxon_signed_rank(&block_accuracies),
        block_accuracies,
    })
}
