//! Linear soft-margin SVM trained by stochastic subgradient descent on the
//! primal objective `lambda/2 ||w||^2 + mean(max(0, 1 - y (w.x + b)))`,
//! with labels mapped internally to {-1, +1}.
//!
//! The weight step follows the Pegasos schedule `eta_t = 1 / (lambda t)`;
//! the unregularized bias takes a `1/t` step so it stays bounded for small
//! `lambda`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

use super::{dot, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmHyper {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmHyper {
    fn default() -> SvmHyper {
        SvmHyper {
            lambda: 1e-3,
            epochs: 200,
        }
    }
}

fn signed_label(label: u8) -> f64 {
    if label == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Primal objective `lambda/2 ||w||^2 + mean hinge`. At `w = 0, b = 0` this
/// is exactly 1.
pub fn hinge_objective(data: &Dataset, bias: f64, weights: &[f64], lambda: f64) -> f64 {
    let mut hinge = 0.0;
    for (row, &label) in data.features.iter_rows().zip(&data.labels) {
        let margin = signed_label(label) * (dot(weights, row) + bias);
        hinge += (1.0 - margin).max(0.0);
    }
    0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>() + hinge / data.n_samples() as f64
}

/// Full-batch subgradient of [`hinge_objective`]; returns (d/d bias,
/// d/d weights). At a margin kink the active-set convention `margin < 1`
/// applies.
pub fn hinge_subgradient(data: &Dataset, bias: f64, weights: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    let n = data.n_samples() as f64;
    let mut grad_bias = 0.0;
    let mut grad: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
    for (row, &label) in data.features.iter_rows().zip(&data.labels) {
        let y = signed_label(label);
        let margin = y * (dot(weights, row) + bias);
        if margin < 1.0 {
            grad_bias -= y / n;
            for (g, x) in grad.iter_mut().zip(row) {
                *g -= y * x / n;
            }
        }
    }
    (grad_bias, grad)
}

pub fn train(data: &Dataset, hyper: &SvmHyper, seed: u64) -> Result<ModelParams> {
    if !(hyper.lambda > 0.0 && hyper.lambda.is_finite()) {
        return Err(Error::Param(format!(
            "lambda must be positive, got {}",
            hyper.lambda
        )));
    }
    if data.n_samples() == 0 {
        return Err(Error::Param("training set is empty".into()));
    }

    let n = data.n_samples();
    let mut weights = vec![0.0; data.n_features()];
    let mut bias = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut step: u64 = 0;

    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            step += 1;
            let t = step as f64;
            let eta = 1.0 / (hyper.lambda * t);
            let row = data.features.row(i);
            let y = signed_label(data.labels[i]);
            let violated = y * (dot(&weights, row) + bias) < 1.0;

            let shrink = 1.0 - 1.0 / t; // = 1 - eta * lambda
            for w in weights.iter_mut() {
                *w *= shrink;
            }
            if violated {
                for (w, x) in weights.iter_mut().zip(row) {
                    *w += eta * y * x;
                }
                bias += y / t;
            }
        }
    }

    if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::Divergence(format!(
            "non-finite SVM parameters with lambda {}",
            hyper.lambda
        )));
    }
    Ok(ModelParams::Svm { bias, weights })
}
