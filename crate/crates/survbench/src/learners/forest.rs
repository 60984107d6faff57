//! Random forest and extremely randomized trees.
//!
//! Both grow an ensemble of CART trees and predict by majority vote. The
//! forest bootstraps the training rows for each tree and considers a fresh
//! random subset of `z` features at every node; extra trees keep the full
//! sample and draw a single uniform threshold per candidate feature.
//! Per-tree randomness derives from (seed, tree index), so construction
//! order does not matter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

use super::tree::{grow, GrowConfig, Splitter};
use super::ModelParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestHyper {
    pub n_trees: usize,
    /// Features considered per node; defaults to `floor(sqrt(n_features))`.
    pub z_features: Option<usize>,
    /// Unlimited when `None`.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestHyper {
    fn default() -> ForestHyper {
        ForestHyper {
            n_trees: 100,
            z_features: None,
            max_depth: None,
            bootstrap: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtraTreesHyper {
    pub n_trees: usize,
    pub z_features: Option<usize>,
    pub max_depth: Option<usize>,
}

impl Default for ExtraTreesHyper {
    fn default() -> ExtraTreesHyper {
        ExtraTreesHyper {
            n_trees: 100,
            z_features: None,
            max_depth: None,
        }
    }
}

/// Independent rng for tree `index` under the master `seed`.
fn tree_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

fn resolve_z(z_features: Option<usize>, n_features: usize) -> Result<usize> {
    match z_features {
        Some(z) if z >= 1 && z <= n_features => Ok(z),
        Some(z) => Err(Error::Param(format!(
            "z_features must be in 1..={n_features}, got {z}"
        ))),
        None => Ok(((n_features as f64).sqrt().floor() as usize).max(1)),
    }
}

pub fn train_forest(data: &Dataset, hyper: &ForestHyper, seed: u64) -> Result<ModelParams> {
    if data.n_samples() == 0 {
        return Err(Error::Param("training set is empty".into()));
    }
    let n = data.n_samples();
    let z = resolve_z(hyper.z_features, data.n_features())?;
    let cfg = GrowConfig {
        max_depth: hyper.max_depth.unwrap_or(usize::MAX),
        min_samples_split: 2,
        feature_subsample: Some(z),
        splitter: Splitter::Midpoint,
    };

    let mut trees = Vec::with_capacity(hyper.n_trees);
    for t in 0..hyper.n_trees {
        let mut rng = tree_rng(seed, t as u64);
        let indices: Vec<usize> = if hyper.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(grow(&data.features, &data.labels, indices, &cfg, &mut rng, 0));
    }
    Ok(ModelParams::Forest { trees })
}

pub fn train_extra_trees(
    data: &Dataset,
    hyper: &ExtraTreesHyper,
    seed: u64,
) -> Result<ModelParams> {
    if data.n_samples() == 0 {
        return Err(Error::Param("training set is empty".into()));
    }
    let z = resolve_z(hyper.z_features, data.n_features())?;
    let cfg = GrowConfig {
        max_depth: hyper.max_depth.unwrap_or(usize::MAX),
        min_samples_split: 2,
        feature_subsample: Some(z),
        splitter: Splitter::UniformRandom,
    };

    let all: Vec<usize> = (0..data.n_samples()).collect();
    let mut trees = Vec::with_capacity(hyper.n_trees);
    for t in 0..hyper.n_trees {
        let mut rng = tree_rng(seed, t as u64);
        trees.push(grow(
            &data.features,
            &data.labels,
            all.clone(),
            &cfg,
            &mut rng,
            0,
        ));
    }
    Ok(ModelParams::ExtraTrees { trees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{train, HyperValue, LearnerKind, LearnerSpec, ModelParams, TreeNode};
    use crate::testutil::dataset_from_rows;
    use rand::SeedableRng;

    fn two_cluster_data(n_per_class: usize, gap: f64, seed: u64) -> crate::data::Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..2 * n_per_class {
            let label = u8::from(i % 2 == 1);
            let center = if label == 1 { gap / 2.0 } else { -gap / 2.0 };
            rows.push(vec![
                center + rng.random::<f64>() - 0.5,
                center + rng.random::<f64>() - 0.5,
            ]);
            labels.push(label);
        }
        dataset_from_rows(rows, &labels)
    }

    #[test]
    fn single_unbootstrapped_tree_matches_cart() {
        let data = two_cluster_data(12, 1.0, 5);
        let forest_spec = LearnerSpec::new(LearnerKind::Forest, 7)
            .with_number("n_trees", 1.0)
            .unwrap()
            .with_number("z_features", 2.0)
            .unwrap()
            .with_number("bootstrap", 0.0)
            .unwrap()
            .with_number("max_depth", 8.0)
            .unwrap();
        let tree_spec = LearnerSpec::new(LearnerKind::Tree, 7);
        let forest = train(&forest_spec, &data).unwrap();
        let tree = train(&tree_spec, &data).unwrap();
        assert_eq!(
            forest.predict(&data.features).unwrap(),
            tree.predict(&data.features).unwrap()
        );
    }

    #[test]
    fn vote_fraction_granularity() {
        let data = two_cluster_data(20, 3.0, 2);
        let model = train(&LearnerSpec::new(LearnerKind::Forest, 3), &data).unwrap();
        for s in model.decision_score(&data.features).unwrap() {
            let scaled = s * 100.0;
            assert!((scaled - scaled.round()).abs() < 1e-9, "score {s} not a vote count");
            assert!((0.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn separable_clusters_classified_perfectly() {
        let train_data = two_cluster_data(20, 6.0, 11);
        let test_data = two_cluster_data(15, 6.0, 99);
        for kind in [LearnerKind::Forest, LearnerKind::ExtraTrees] {
            let model = train(&LearnerSpec::new(kind, 1), &train_data).unwrap();
            let predictions = model.predict(&test_data.features).unwrap();
            assert_eq!(predictions, test_data.labels, "{kind:?}");
        }
    }

    #[test]
    fn z_features_out_of_range_rejected() {
        let data = two_cluster_data(5, 2.0, 1);
        let spec = LearnerSpec::new(LearnerKind::Forest, 0)
            .with_number("z_features", 9.0)
            .unwrap();
        assert!(train(&spec, &data).is_err());
    }

    #[test]
    fn extra_trees_threshold_strictly_inside_support() {
        // Single binary feature: every internal threshold must fall in (0, 1).
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![f64::from(i % 2 == 0)]).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i % 2 == 0)).collect();
        let data = dataset_from_rows(rows, &labels);
        let spec = LearnerSpec::new(LearnerKind::ExtraTrees, 4)
            .with_number("n_trees", 1.0)
            .unwrap()
            .with_number("z_features", 1.0)
            .unwrap();
        let model = train(&spec, &data).unwrap();
        let ModelParams::ExtraTrees { trees } = model.params() else {
            panic!("expected extra trees params");
        };
        fn check(node: &TreeNode) {
            if let TreeNode::Internal {
                threshold,
                left,
                right,
                ..
            } = node
            {
                assert!(*threshold > 0.0 && *threshold < 1.0);
                check(left);
                check(right);
            }
        }
        check(&trees[0]);
    }

    #[test]
    fn extra_trees_skip_constant_feature() {
        // One constant column and one informative: splits only use column 1.
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![3.0, i as f64]).collect();
        let labels: Vec<u8> = (0..10).map(|i| u8::from(i >= 5)).collect();
        let data = dataset_from_rows(rows, &labels);
        let spec = LearnerSpec::new(LearnerKind::ExtraTrees, 8)
            .with_number("n_trees", 5.0)
            .unwrap()
            .with_number("z_features", 2.0)
            .unwrap();
        let model = train(&spec, &data).unwrap();
        let ModelParams::ExtraTrees { trees } = model.params() else {
            panic!("expected extra trees params");
        };
        fn check(node: &TreeNode) {
            if let TreeNode::Internal {
                feature,
                left,
                right,
                ..
            } = node
            {
                assert_eq!(*feature, 1, "constant feature used for a split");
                check(left);
                check(right);
            }
        }
        for t in trees {
            check(t);
        }
    }

    #[test]
    fn same_seed_same_predictions() {
        let data = two_cluster_data(15, 1.5, 21);
        let probe = two_cluster_data(10, 1.5, 22);
        for kind in [LearnerKind::Forest, LearnerKind::ExtraTrees] {
            let a = train(&LearnerSpec::new(kind, 77), &data).unwrap();
            let b = train(&LearnerSpec::new(kind, 77), &data).unwrap();
            assert_eq!(
                a.predict(&probe.features).unwrap(),
                b.predict(&probe.features).unwrap()
            );
        }
    }

    #[test]
    fn hyper_value_text_rejected_for_counts() {
        let spec = LearnerSpec::new(LearnerKind::Forest, 0)
            .with("n_trees", HyperValue::Text("many".into()))
            .unwrap();
        assert!(spec.forest_hyper().is_err());
    }
}
