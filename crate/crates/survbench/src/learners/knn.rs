//! k-nearest-neighbor classification over a stored training set.
//!
//! Prediction takes the majority label of the k nearest rows under the
//! chosen metric; distance ties prefer the lower training-row index. With
//! two classes k should be odd, so an even k is decremented with a warning.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::ModelParams;

/// Distance used for the neighbor search. Hamming counts coordinates that
/// differ exactly, which is intended for binary or categorical encodings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    Manhattan,
    Minkowski(f64),
    Hamming,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Minkowski(p) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
            Metric::Hamming => a.iter().zip(b).filter(|(x, y)| x != y).count() as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnHyper {
    pub k: usize,
    pub metric: Metric,
}

impl Default for KnnHyper {
    fn default() -> KnnHyper {
        KnnHyper {
            k: 5,
            metric: Metric::Euclidean,
        }
    }
}

pub fn train(data: &Dataset, hyper: &KnnHyper) -> Result<ModelParams> {
    if data.n_samples() == 0 {
        return Err(Error::Param("training set is empty".into()));
    }
    if let Metric::Minkowski(p) = hyper.metric {
        if p < 1.0 {
            return Err(Error::Param(format!("minkowski order p must be >= 1, got {p}")));
        }
    }
    let mut k = hyper.k;
    if k == 0 {
        return Err(Error::Param("k must be at least 1".into()));
    }
    if k % 2 == 0 {
        log::warn!("even k = {k} cannot break two-class ties; using k = {}", k - 1);
        k -= 1;
    }
    if k > data.n_samples() {
        return Err(Error::Param(format!(
            "k = {k} exceeds the {} training samples",
            data.n_samples()
        )));
    }
    Ok(ModelParams::Knn {
        features: data.features.clone(),
        labels: data.labels.clone(),
        k,
        metric: hyper.metric,
    })
}

/// Fraction of the k nearest training rows labeled 1. Neighbor order is
/// (distance, index) ascending; the k-smallest prefix is found by a
/// partition step rather than a full sort.
pub(crate) fn vote_fraction(
    features: &Matrix,
    labels: &[u8],
    k: usize,
    metric: Metric,
    query: &[f64],
) -> f64 {
    let mut ranked: Vec<(f64, usize)> = features
        .iter_rows()
        .enumerate()
        .map(|(i, row)| (metric.distance(query, row), i))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1))
    };
    if k < ranked.len() {
        ranked.select_nth_unstable_by(k - 1, order);
    }
    let positives = ranked[..k].iter().filter(|(_, i)| labels[*i] == 1).count();
    positives as f64 / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{train as train_model, LearnerKind, LearnerSpec, HyperValue};
    use crate::testutil::dataset_from_rows;

    fn three_point_train() -> Dataset {
        dataset_from_rows(
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![2.0, 2.0]],
            &[0, 0, 1],
        )
    }

    #[test]
    fn exact_match_wins_with_k1() {
        let data = three_point_train();
        let spec = LearnerSpec::new(LearnerKind::Knn, 0)
            .with_number("k", 1.0)
            .unwrap();
        let model = train_model(&spec, &data).unwrap();
        let probe = dataset_from_rows(vec![vec![2.0, 2.0]], &[1]);
        assert_eq!(model.predict(&probe.features).unwrap(), vec![1]);
    }

    #[test]
    fn three_neighbor_fixture() {
        let data = three_point_train();
        let spec = LearnerSpec::new(LearnerKind::Knn, 0)
            .with_number("k", 3.0)
            .unwrap();
        let model = train_model(&spec, &data).unwrap();
        let probe = dataset_from_rows(vec![vec![0.0, 0.4]], &[0]);
        assert_eq!(model.predict(&probe.features).unwrap(), vec![0]);
        let score = model.decision_score(&probe.features).unwrap()[0];
        assert!((score - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn minkowski_two_matches_euclidean() {
        let data = dataset_from_rows(
            (0..12)
                .map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()])
                .collect(),
            &(0..12).map(|i| (i % 2) as u8).collect::<Vec<_>>(),
        );
        let euclid = train_model(
            &LearnerSpec::new(LearnerKind::Knn, 0)
                .with_number("k", 3.0)
                .unwrap(),
            &data,
        )
        .unwrap();
        let minkow = train_model(
            &LearnerSpec::new(LearnerKind::Knn, 0)
                .with_number("k", 3.0)
                .unwrap()
                .with("metric", HyperValue::Text("minkowski".into()))
                .unwrap()
                .with_number("p", 2.0)
                .unwrap(),
            &data,
        )
        .unwrap();
        let probe = dataset_from_rows(vec![vec![0.3, -0.2], vec![-0.8, 0.9]], &[0, 0]);
        assert_eq!(
            euclid.decision_score(&probe.features).unwrap(),
            minkow.decision_score(&probe.features).unwrap()
        );
    }

    #[test]
    fn distance_ties_prefer_lower_index() {
        // Two training rows at the same spot with different labels.
        let data = dataset_from_rows(vec![vec![1.0], vec![1.0], vec![5.0]], &[1, 0, 0]);
        let fraction = vote_fraction(&data.features, &data.labels, 1, Metric::Euclidean, &[1.0]);
        assert_eq!(fraction, 1.0); // row 0 wins the tie
    }

    #[test]
    fn even_k_decremented() {
        let data = three_point_train();
        let spec = LearnerSpec::new(LearnerKind::Knn, 0)
            .with_number("k", 2.0)
            .unwrap();
        let model = train_model(&spec, &data).unwrap();
        let ModelParams::Knn { k, .. } = model.params() else {
            panic!("expected knn params");
        };
        assert_eq!(*k, 1);
    }

    #[test]
    fn oversized_k_rejected() {
        let data = three_point_train();
        let spec = LearnerSpec::new(LearnerKind::Knn, 0)
            .with_number("k", 5.0)
            .unwrap();
        assert!(matches!(train_model(&spec, &data), Err(Error::Param(_))));
    }

    #[test]
    fn knn_memorizes_training_set_with_k1() {
        let data = dataset_from_rows(
            (0..25)
                .map(|i| vec![i as f64 * 0.31, (i as f64).sin()])
                .collect(),
            &(0..25).map(|i| u8::from(i % 4 == 0)).collect::<Vec<_>>(),
        );
        let spec = LearnerSpec::new(LearnerKind::Knn, 0)
            .with_number("k", 1.0)
            .unwrap();
        let model = train_model(&spec, &data).unwrap();
        assert_eq!(model.predict(&data.features).unwrap(), data.labels);
    }

    #[test]
    fn hamming_counts_differing_coordinates() {
        assert_eq!(Metric::Hamming.distance(&[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]), 1.0);
        assert_eq!(Metric::Manhattan.distance(&[0.0, 1.0], &[2.0, -1.0]), 4.0);
    }
}
