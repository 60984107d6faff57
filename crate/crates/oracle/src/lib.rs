//! Brute-force reference implementations backing the test suite.
//!
//! Everything here favors obviousness over speed: full enumerations,
//! explicit sorts, central finite differences. None of it shares code with
//! the implementations it checks, and none of it is meant to run beyond
//! desk-scale fixtures.

use survbench::data::Dataset;
use survbench::learners::Metric;

/// Independent distance computation (the oracle shares no code with the
/// learner, including the metric arithmetic).
fn distance(metric: Metric, a: &[f64], b: &[f64]) -> f64 {
    match metric {
        Metric::Euclidean => {
            let mut total = 0.0;
            for i in 0..a.len() {
                let d = a[i] - b[i];
                total += d * d;
            }
            total.sqrt()
        }
        Metric::Manhattan => {
            let mut total = 0.0;
            for i in 0..a.len() {
                total += (a[i] - b[i]).abs();
            }
            total
        }
        Metric::Minkowski(p) => {
            let mut total = 0.0;
            for i in 0..a.len() {
                total += (a[i] - b[i]).abs().powf(p);
            }
            total.powf(1.0 / p)
        }
        Metric::Hamming => {
            let mut count = 0.0;
            for i in 0..a.len() {
                if a[i] != b[i] {
                    count += 1.0;
                }
            }
            count
        }
    }
}

/// k-nearest-neighbor label by full distance enumeration and an explicit
/// stable sort on (distance, index).
pub fn knn_bruteforce(train: &Dataset, query: &[f64], k: usize, metric: Metric) -> u8 {
    assert!(k >= 1 && k <= train.n_samples(), "k out of range");
    let mut ranked: Vec<(f64, usize)> = (0..train.n_samples())
        .map(|i| (distance(metric, query, train.features.row(i)), i))
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let positives = ranked[..k]
        .iter()
        .filter(|(_, i)| train.labels[*i] == 1)
        .count();
    u8::from(2 * positives > k)
}

/// AUC as the Mann-Whitney pairwise statistic: the fraction of
/// (positive, negative) pairs where the positive outscores the negative,
/// ties counting one half.
pub fn auc_pairwise(truth: &[u8], scores: &[f64]) -> Result<f64, String> {
    assert_eq!(truth.len(), scores.len());
    let positives: Vec<f64> = truth
        .iter()
        .zip(scores)
        .filter(|(&t, _)| t == 1)
        .map(|(_, &s)| s)
        .collect();
    let negatives: Vec<f64> = truth
        .iter()
        .zip(scores)
        .filter(|(&t, _)| t == 0)
        .map(|(_, &s)| s)
        .collect();
    if positives.is_empty() || negatives.is_empty() {
        return Err("both classes must be present".to_string());
    }
    let mut total = 0.0;
    for &p in &positives {
        for &n in &negatives {
            if p > n {
                total += 1.0;
            } else if p == n {
                total += 0.5;
            }
        }
    }
    Ok(total / (positives.len() as f64 * negatives.len() as f64))
}

/// Central finite differences of `loss` at `point`, one coordinate at a
/// time.
pub fn finite_difference_gradient<F>(loss: F, point: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut gradient = Vec::with_capacity(point.len());
    let mut probe = point.to_vec();
    for i in 0..point.len() {
        probe[i] = point[i] + h;
        let above = loss(&probe);
        probe[i] = point[i] - h;
        let below = loss(&probe);
        probe[i] = point[i];
        assert!(
            above.is_finite() && below.is_finite(),
            "loss not finite at probe point"
        );
        gradient.push((above - below) / (2.0 * h));
    }
    gradient
}

/// Exhaustive weighted decision stump search over every feature and every
/// midpoint threshold. Labels are 0/1; each side of a candidate split
/// predicts its weighted-majority label (ties predict 0). Returns
/// (feature, threshold, weighted error); ties keep the lowest feature,
/// then the lowest threshold.
pub fn exhaustive_stump(data: &Dataset, weights: &[f64]) -> (usize, f64, f64) {
    assert!(data.n_samples() > 0, "empty data");
    assert_eq!(weights.len(), data.n_samples());

    let mut best: Option<(usize, f64, f64)> = None;
    for feature in 0..data.n_features() {
        let mut values: Vec<f64> = (0..data.n_samples())
            .map(|i| data.features.get(i, feature))
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();

        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let mut side_weight = [[0.0f64; 2]; 2]; // [side][label]
            for i in 0..data.n_samples() {
                let side = usize::from(data.features.get(i, feature) > threshold);
                side_weight[side][data.labels[i] as usize] += weights[i];
            }
            let mut error = 0.0;
            for side in side_weight {
                // Weighted-majority leaf: the minority weight is the error.
                error += if side[1] > side[0] { side[0] } else { side[1] };
            }
            let better = match best {
                None => true,
                Some((_, _, best_error)) => error < best_error,
            };
            if better {
                best = Some((feature, threshold, error));
            }
        }
    }

    best.unwrap_or_else(|| {
        // All features constant: any threshold works, the leaf takes the
        // weighted majority. Report feature 0 with a below-all threshold.
        let pos: f64 = (0..data.n_samples())
            .filter(|&i| data.labels[i] == 1)
            .map(|i| weights[i])
            .sum();
        let neg: f64 = weights.iter().sum::<f64>() - pos;
        let threshold = if data.n_features() > 0 {
            data.features.get(0, 0) - 1.0
        } else {
            0.0
        };
        (0, threshold, pos.min(neg))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use survbench::data::{FeatureKind, FeatureMeta, ImputeValue};
    use survbench::Matrix;

    fn dataset(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Dataset {
        let cols = rows.first().map_or(0, |r| r.len());
        let meta = (0..cols)
            .map(|c| FeatureMeta {
                name: format!("x{c}"),
                source: format!("x{c}"),
                kind: FeatureKind::Numeric,
                categories: Vec::new(),
                impute: ImputeValue::Number(0.0),
                scale: None,
            })
            .collect();
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Dataset::new(Matrix::from_rows(rows).unwrap(), labels, meta, ids).unwrap()
    }

    #[test]
    fn knn_k_equals_n_predicts_majority() {
        let data = dataset(
            vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![1, 1, 1, 0, 0],
        );
        assert_eq!(knn_bruteforce(&data, &[100.0], 5, Metric::Euclidean), 1);
    }

    #[test]
    fn knn_distance_tie_prefers_lower_index() {
        let data = dataset(vec![vec![1.0], vec![1.0]], vec![1, 0]);
        assert_eq!(knn_bruteforce(&data, &[1.0], 1, Metric::Euclidean), 1);
    }

    #[test]
    fn auc_of_labels_as_scores_is_one() {
        let truth = [0u8, 1, 0, 1, 1];
        let scores: Vec<f64> = truth.iter().map(|&t| f64::from(t)).collect();
        assert_eq!(auc_pairwise(&truth, &scores).unwrap(), 1.0);
    }

    #[test]
    fn auc_of_constant_scores_is_half() {
        assert_eq!(auc_pairwise(&[0, 1, 0, 1], &[3.0; 4]).unwrap(), 0.5);
    }

    #[test]
    fn auc_single_class_is_error() {
        assert!(auc_pairwise(&[1, 1], &[0.2, 0.4]).is_err());
    }

    #[test]
    fn finite_differences_on_quadratic() {
        let loss = |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>();
        let gradient = finite_difference_gradient(loss, &[1.0, 2.0], 1e-5);
        assert!((gradient[0] - 1.0).abs() < 1e-8);
        assert!((gradient[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn stump_on_separable_fixture() {
        let data = dataset(
            vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]],
            vec![0, 0, 1, 1],
        );
        let (feature, threshold, error) = exhaustive_stump(&data, &[0.25; 4]);
        assert_eq!(feature, 0);
        assert_eq!(threshold, 2.5);
        assert_eq!(error, 0.0);
    }

    #[test]
    fn stump_with_uniform_labels_has_zero_error() {
        let data = dataset(vec![vec![1.0], vec![2.0], vec![5.0]], vec![1, 1, 1]);
        let (feature, threshold, error) = exhaustive_stump(&data, &[1.0 / 3.0; 3]);
        assert_eq!(feature, 0);
        assert_eq!(threshold, 1.5); // lowest threshold among the ties
        assert_eq!(error, 0.0);
    }
}
