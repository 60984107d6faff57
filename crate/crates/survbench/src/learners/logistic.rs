//! Binary logistic regression trained by full-batch gradient descent on the
//! L2-regularized negative log-likelihood. Weights start at zero, so
//! training is deterministic; the bias is not regularized.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

use super::{dot, ModelParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticHyper {
    fn default() -> LogisticHyper {
        LogisticHyper {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

/// Numerically stable `1 / (1 + e^-z)`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-sample negative log-likelihood `ln(1 + e^z) - y z`, computed without
/// overflow.
fn nll_term(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

/// Mean negative log-likelihood plus `l2/2 * ||w||^2` (bias excluded).
pub fn nll_loss(data: &Dataset, bias: f64, weights: &[f64], l2: f64) -> f64 {
    let n = data.n_samples() as f64;
    let mut loss = 0.0;
    for (row, &label) in data.features.iter_rows().zip(&data.labels) {
        let z = bias + dot(weights, row);
        loss += nll_term(z, f64::from(label));
    }
    loss / n + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`nll_loss`]: returns (d/d bias, d/d weights).
pub fn nll_gradient(data: &Dataset, bias: f64, weights: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let n = data.n_samples() as f64;
    let mut grad_bias = 0.0;
    let mut grad = vec![0.0; weights.len()];
    for (row, &label) in data.features.iter_rows().zip(&data.labels) {
        let z = bias + dot(weights, row);
        let residual = sigmoid(z) - f64::from(label);
        grad_bias += residual;
        for (g, x) in grad.iter_mut().zip(row) {
            *g += residual * x;
        }
    }
    grad_bias /= n;
    for (g, w) in grad.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_bias, grad)
}

pub fn train(data: &Dataset, hyper: &LogisticHyper) -> Result<ModelParams> {
    if data.n_samples() == 0 {
        return Err(Error::Param("training set is empty".into()));
    }
    let mut bias = 0.0;
    let mut weights = vec![0.0; data.n_features()];

    for epoch in 0..hyper.epochs {
        let (grad_bias, grad) = nll_gradient(data, bias, &weights, hyper.l2);
        bias -= hyper.learning_rate * grad_bias;
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= hyper.learning_rate * g;
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence(format!(
                "non-finite parameters at epoch {epoch} with learning_rate {}",
                hyper.learning_rate
            )));
        }
    }

    if !nll_loss(data, bias, &weights, hyper.l2).is_finite() {
        return Err(Error::Divergence(format!(
            "non-finite loss after training with learning_rate {}",
            hyper.learning_rate
        )));
    }
    Ok(ModelParams::Logistic { bias, weights })
}
