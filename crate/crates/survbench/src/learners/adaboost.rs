//! Discrete AdaBoost over exhaustive-search decision stumps.
//!
//! Each round fits the depth-1 rule minimizing weighted misclassification
//! error, weighs it by `alpha = 0.5 ln((1 - err) / err)`, then multiplies
//! every instance weight by `e^{-alpha}` (correct) or `e^{+alpha}` (wrong)
//! and renormalizes. A zero-error round keeps a capped alpha and stops; a
//! round with error >= 0.5 is discarded and stops.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::ModelParams;

/// Alpha assigned when a stump has zero weighted error:
/// `0.5 ln((1 - eps) / eps)` with `eps = 1e-10`.
pub const ALPHA_EPSILON: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostHyper {
    pub n_rounds: usize,
}

impl Default for AdaBoostHyper {
    fn default() -> AdaBoostHyper {
        AdaBoostHyper { n_rounds: 50 }
    }
}

/// A depth-1 rule: rows with `value <= threshold` get `left_label`, the
/// rest `right_label`; labels are in {-1, +1}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left_label: i8,
    pub right_label: i8,
}

impl Stump {
    pub fn classify(&self, row: &[f64]) -> i8 {
        if self.left_label == self.right_label {
            // Constant rule; no feature lookup needed.
            return self.left_label;
        }
        if row[self.feature] <= self.threshold {
            self.left_label
        } else {
            self.right_label
        }
    }
}

/// One boosting round, recorded for inspection: the stump's weighted error,
/// its alpha, and the normalized instance weights after the update.
#[derive(Clone, Debug, PartialEq)]
pub struct BoostRound {
    pub error: f64,
    pub alpha: f64,
    pub weights: Vec<f64>,
}

pub fn train(data: &Dataset, hyper: &AdaBoostHyper) -> Result<ModelParams> {
    train_traced(data, hyper).map(|(params, _)| params)
}

/// Like [`train`] but also returns the per-round trace.
pub fn train_traced(
    data: &Dataset,
    hyper: &AdaBoostHyper,
) -> Result<(ModelParams, Vec<BoostRound>)> {
    if hyper.n_rounds < 1 {
        return Err(Error::Param("n_rounds must be at least 1".into()));
    }
    if data.n_samples() == 0 {
        return Err(Error::Param("training set is empty".into()));
    }
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::Param("AdaBoost requires both classes in the training set".into()));
    }

    let n = data.n_samples();
    let signed: Vec<i8> = data.labels.iter().map(|&l| if l == 1 { 1 } else { -1 }).collect();
    let mut weights = vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    let mut alphas = Vec::new();
    let mut trace = Vec::new();

    for _ in 0..hyper.n_rounds {
        let (stump, error) = fit_stump(&data.features, &signed, &weights);
        if error >= 0.5 {
            break; // no better than chance: discard the round and stop
        }
        let alpha = if error == 0.0 {
            0.5 * ((1.0 - ALPHA_EPSILON) / ALPHA_EPSILON).ln()
        } else {
            0.5 * ((1.0 - error) / error).ln()
        };
        stumps.push(stump);
        alphas.push(alpha);

        if error == 0.0 {
            trace.push(BoostRound {
                error,
                alpha,
                weights: weights.clone(),
            });
            break;
        }

        let mut total = 0.0;
        for i in 0..n {
            let correct = stump.classify(data.features.row(i)) == signed[i];
            weights[i] *= if correct { (-alpha).exp() } else { alpha.exp() };
            total += weights[i];
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        trace.push(BoostRound {
            error,
            alpha,
            weights: weights.clone(),
        });
    }

    Ok((ModelParams::AdaBoost { stumps, alphas }, trace))
}

/// Exhaustive weighted stump search: every feature, every midpoint between
/// consecutive distinct sorted values, optimal leaf labels per side. Ties
/// keep the lowest feature index, then the lowest threshold.
fn fit_stump(features: &Matrix, signed: &[i8], weights: &[f64]) -> (Stump, f64) {
    let total_pos: f64 = signed
        .iter()
        .zip(weights)
        .filter(|(&y, _)| y == 1)
        .map(|(_, &w)| w)
        .sum();
    let total_neg: f64 = weights.iter().sum::<f64>() - total_pos;

    let mut best: Option<(Stump, f64)> = None;
    for feature in 0..features.cols() {
        let mut column: Vec<(f64, i8, f64)> = (0..features.rows())
            .map(|i| (features.get(i, feature), signed[i], weights[i]))
            .collect();
        column.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut left_pos = 0.0;
        let mut left_neg = 0.0;
        for i in 0..column.len() - 1 {
            let (value, label, weight) = column[i];
            if label == 1 {
                left_pos += weight;
            } else {
                left_neg += weight;
            }
            if value == column[i + 1].0 {
                continue;
            }
            let threshold = (value + column[i + 1].0) / 2.0;
            // Each leaf takes its weighted-majority label; ties predict -1.
            let (left_label, left_err) = leaf_choice(left_pos, left_neg);
            let (right_label, right_err) = leaf_choice(total_pos - left_pos, total_neg - left_neg);
            let error = left_err + right_err;
            let candidate = Stump {
                feature,
                threshold,
                left_label,
                right_label,
            };
            match &best {
                Some((_, best_err)) if error >= *best_err => {}
                _ => best = Some((candidate, error)),
            }
        }
    }

    best.unwrap_or_else(|| {
        // Every feature is constant: a single-leaf rule predicting the
        // weighted majority everywhere.
        let (label, error) = leaf_choice(total_pos, total_neg);
        let below_all = if features.cols() > 0 {
            features.get(0, 0) - 1.0
        } else {
            0.0
        };
        (
            Stump {
                feature: 0,
                threshold: below_all,
                left_label: label,
                right_label: label,
            },
            error,
        )
    })
}

/// Optimal leaf label for a side holding `pos` / `neg` weight, and the
/// weighted error it incurs.
fn leaf_choice(pos: f64, neg: f64) -> (i8, f64) {
    if pos > neg {
        (1, neg)
    } else {
        (-1, pos)
    }
}
