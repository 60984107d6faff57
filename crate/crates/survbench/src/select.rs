//! Univariate feature scoring (one-way ANOVA F) and top-k selection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Returned when the within-class variance is zero but the class means
/// differ: the column separates the classes perfectly.
pub const PERFECT_SEPARATION_F: f64 = 1e12;

/// Score and rank of one feature. Rank 1 is the highest score; ties are
/// broken by ascending feature name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature_name: String,
    pub score: f64,
    pub rank: usize,
}

/// One-way ANOVA F statistic between the two class-conditional samples:
/// `F = (SSB / 1) / (SSW / (n - 2))`.
///
/// Returns [`PERFECT_SEPARATION_F`] when the within-class variance is zero
/// while the class means differ.
pub fn anova_f(column: &[f64], labels: &[u8]) -> Result<f64> {
    if column.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} values but {} labels",
            column.len(),
            labels.len()
        )));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::Score("column contains non-finite values".into()));
    }

    let mut sum = [0.0f64; 2];
    let mut count = [0usize; 2];
    for (&v, &l) in column.iter().zip(labels) {
        sum[l as usize] += v;
        count[l as usize] += 1;
    }
    if count[0] == 0 || count[1] == 0 {
        return Err(Error::Score("both classes must be present".into()));
    }

    let n = column.len() as f64;
    let grand_mean = (sum[0] + sum[1]) / n;
    let mean = [sum[0] / count[0] as f64, sum[1] / count[1] as f64];

    let mut ssb = 0.0;
    for c in 0..2 {
        let d = mean[c] - grand_mean;
        ssb += count[c] as f64 * d * d;
    }
    let mut ssw = 0.0;
    for (&v, &l) in column.iter().zip(labels) {
        let d = v - mean[l as usize];
        ssw += d * d;
    }

    if ssw == 0.0 {
        return Ok(if ssb == 0.0 { 0.0 } else { PERFECT_SEPARATION_F });
    }
    let df_within = n - 2.0;
    Ok((ssb / 1.0) / (ssw / df_within))
}

/// Score every encoded column of `data` and attach ranks.
pub fn score_columns(data: &Dataset) -> Result<Vec<FeatureScore>> {
    let mut scores = Vec::with_capacity(data.n_features());
    for c in 0..data.n_features() {
        let score = anova_f(&data.features.column(c), &data.labels)?;
        scores.push(FeatureScore {
            feature_name: data.meta[c].name.clone(),
            score,
            rank: 0,
        });
    }
    assign_ranks(&mut scores);
    Ok(scores)
}

/// Per-variable importance: the maximum F over all encoded columns sharing
/// a source column, re-ranked. This is the score reported for categorical
/// variables, which expand into several one-hot columns.
pub fn variable_scores(data: &Dataset) -> Result<Vec<FeatureScore>> {
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for c in 0..data.n_features() {
        let score = anova_f(&data.features.column(c), &data.labels)?;
        let entry = best.entry(data.meta[c].source.as_str()).or_insert(f64::MIN);
        if score > *entry {
            *entry = score;
        }
    }
    let mut scores: Vec<FeatureScore> = best
        .into_iter()
        .map(|(name, score)| FeatureScore {
            feature_name: name.to_string(),
            score,
            rank: 0,
        })
        .collect();
    assign_ranks(&mut scores);
    Ok(scores)
}

/// Rank by descending score, ties broken by ascending feature name. The
/// input order is preserved; only `rank` is filled in.
fn assign_ranks(scores: &mut [FeatureScore]) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .score
            .partial_cmp(&scores[a].score)
            .unwrap()
            .then_with(|| scores[a].feature_name.cmp(&scores[b].feature_name))
    });
    for (rank0, &idx) in order.iter().enumerate() {
        scores[idx].rank = rank0 + 1;
    }
}

/// Keep the `k` top-ranked encoded columns (original column order is
/// preserved). Scores for all columns are returned alongside.
pub fn select_k_best(data: &Dataset, k: usize) -> Result<(Dataset, Vec<FeatureScore>)> {
    if k == 0 || k > data.n_features() {
        return Err(Error::Param(format!(
            "k must be in 1..={}, got {k}",
            data.n_features()
        )));
    }
    let scores = score_columns(data)?;
    let keep: Vec<usize> = (0..data.n_features())
        .filter(|&c| scores[c].rank <= k)
        .collect();
    Ok((data.select_columns(&keep), scores))
}
