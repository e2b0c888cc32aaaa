//! Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped, tied magnitudes get average ranks. The
//! two-sided p-value is exact for up to [`EXACT_MAX_N`] non-zero pairs
//! (the null distribution of the signed-rank sum is counted by dynamic
//! programming over doubled ranks, so average ranks stay integral) and
//! uses the tie-corrected normal approximation with continuity correction
//! beyond that.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMethod {
    Exact,
    Normal,
    /// No non-zero differences.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub n_effective: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`
    pub statistic: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Average ranks (1-based) of `values`, doubled so they are integers.
/// Returns `(doubled ranks, tie group sizes)`.
fn doubled_ranks(values: &[f64]) -> (Vec<u64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1, average (i+j+2)/2
        let doubled = (i + j + 2) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Number of sign assignments whose doubled positive-rank sum equals each
/// value `0..=Σ ranks`.
fn signed_rank_counts(doubled: &[u64]) -> Vec<u64> {
    let total: u64 = doubled.iter().sum();
    let mut counts = vec![0u64; total as usize + 1];
    counts[0] = 1;
    let mut reach = 0usize;
    for &r in doubled {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if counts[s] != 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    counts
}

fn normal_two_sided(statistic: f64, n: usize, ties: &[usize]) -> f64 {
    let n = n as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ties
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((statistic - mean).abs() - 0.5).max(0.0) / libm::sqrt(var);
    libm::erfc(z / core::f64::consts::SQRT_2).min(1.0)
}

/// Signed-rank test on `d_i = x_i − y_i`.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> WilcoxonResult {
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return WilcoxonResult {
            n_effective: 0,
            w_plus: 0.0,
            w_minus: 0.0,
            statistic: 0.0,
            p_value: 1.0,
            method: PValueMethod::Degenerate,
        };
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (doubled, ties) = doubled_ranks(&magnitudes);
    let plus2: u64 = doubled
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total2: u64 = doubled.iter().sum();
    let minus2 = total2 - plus2;
    let stat2 = plus2.min(minus2);
    let statistic = stat2 as f64 / 2.0;

    let (p_value, method) = if n <= EXACT_MAX_N {
        let counts = signed_rank_counts(&doubled);
        // P(min(W+, W−) ≤ observed) under the symmetric null.
        let extreme: u64 = counts
            .iter()
            .enumerate()
            .filter(|(s, _)| (*s as u64).min(total2 - *s as u64) <= stat2)
            .map(|(_, c)| *c)
            .sum();
        (extreme as f64 / (1u64 << n) as f64, PValueMethod::Exact)
    } else {
        (normal_two_sided(statistic, n, &ties), PValueMethod::Normal)
    };

    WilcoxonResult {
        n_effective: n,
        w_plus: plus2 as f64 / 2.0,
        w_minus: minus2 as f64 / 2.0,
        statistic,
        p_value,
        method,
    }
}
