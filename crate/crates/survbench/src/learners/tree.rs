//! CART decision tree: greedy binary splits minimizing weighted Gini
//! impurity. The same growth routine backs single trees, random forests
//! (feature subsampling per node) and extra trees (one uniform random
//! threshold per candidate feature).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::ModelParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeHyper {
    pub max_depth: usize,
    pub min_samples_split: usize,
}

impl Default for TreeHyper {
    fn default() -> TreeHyper {
        TreeHyper {
            max_depth: 8,
            min_samples_split: 2,
        }
    }
}

/// A tree node: internal nodes route on `value <= threshold` (left) vs
/// `value > threshold` (right), leaves carry the majority label and the
/// class-1 fraction of the training rows they absorbed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        label: u8,
        fraction: f64,
    },
}

impl TreeNode {
    /// Route a row to its leaf; returns (majority label, class-1 fraction).
    pub fn leaf_for(&self, row: &[f64]) -> (u8, f64) {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { label, fraction } => return (*label, *fraction),
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Gini impurity of a two-class count pair: `1 - p0^2 - p1^2`.
pub fn gini(neg: usize, pos: usize) -> f64 {
    let n = (neg + pos) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = neg as f64 / n;
    let p1 = pos as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

/// Train a single CART tree on the full sample.
pub fn train(data: &Dataset, hyper: &TreeHyper) -> Result<ModelParams> {
    if data.n_samples() == 0 {
        return Err(Error::Param("training set is empty".into()));
    }
    let indices: Vec<usize> = (0..data.n_samples()).collect();
    let cfg = GrowConfig {
        max_depth: hyper.max_depth,
        min_samples_split: hyper.min_samples_split,
        feature_subsample: None,
        splitter: Splitter::Midpoint,
    };
    // A plain CART consumes no randomness; the rng is only threaded for the
    // ensemble variants.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let root = grow(&data.features, &data.labels, indices, &cfg, &mut rng, 0);
    Ok(ModelParams::Tree { root })
}

/// How candidate thresholds are generated at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Splitter {
    /// Every midpoint between consecutive distinct sorted values.
    Midpoint,
    /// One threshold per feature, drawn uniformly inside (min, max).
    UniformRandom,
}

pub(crate) struct GrowConfig {
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Number of features considered per node; `None` means all.
    pub feature_subsample: Option<usize>,
    pub splitter: Splitter,
}

pub(crate) fn grow(
    features: &Matrix,
    labels: &[u8],
    indices: Vec<usize>,
    cfg: &GrowConfig,
    rng: &mut ChaCha8Rng,
    depth: usize,
) -> TreeNode {
    let pos = indices.iter().filter(|&&i| labels[i] == 1).count();
    let neg = indices.len() - pos;

    let stop = neg == 0
        || pos == 0
        || depth >= cfg.max_depth
        || indices.len() < cfg.min_samples_split;
    if !stop {
        if let Some(split) = best_split(features, labels, &indices, cfg, rng) {
            let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
                .iter()
                .partition(|&&i| features.get(i, split.feature) <= split.threshold);
            let left = grow(features, labels, left_idx, cfg, rng, depth + 1);
            let right = grow(features, labels, right_idx, cfg, rng, depth + 1);
            return TreeNode::Internal {
                feature: split.feature,
                threshold: split.threshold,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
    }

    // Majority leaf; ties predict 0.
    TreeNode::Leaf {
        label: u8::from(pos > neg),
        fraction: pos as f64 / indices.len() as f64,
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Candidate features for this node, ascending. Subsampling without
/// replacement when configured.
fn candidate_features(n_features: usize, cfg: &GrowConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    match cfg.feature_subsample {
        Some(z) if z < n_features => {
            let mut picked = rand::seq::index::sample(rng, n_features, z).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..n_features).collect(),
    }
}

/// Best (feature, threshold) by weighted Gini. Ties keep the first
/// candidate found, i.e. the lowest feature index, then the lowest
/// threshold.
fn best_split(
    features: &Matrix,
    labels: &[u8],
    indices: &[usize],
    cfg: &GrowConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Split> {
    let mut best: Option<Split> = None;
    let total_pos = indices.iter().filter(|&&i| labels[i] == 1).count();

    for feature in candidate_features(features.cols(), cfg, rng) {
        let mut column: Vec<(f64, u8)> = indices
            .iter()
            .map(|&i| (features.get(i, feature), labels[i]))
            .collect();
        column.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        match cfg.splitter {
            Splitter::Midpoint => {
                sweep_midpoints(&column, total_pos, feature, &mut best);
            }
            Splitter::UniformRandom => {
                sweep_random_threshold(&column, total_pos, feature, rng, &mut best);
            }
        }
    }
    best
}

fn weighted_gini(left_neg: usize, left_pos: usize, right_neg: usize, right_pos: usize) -> f64 {
    let n_left = (left_neg + left_pos) as f64;
    let n_right = (right_neg + right_pos) as f64;
    let n = n_left + n_right;
    (n_left * gini(left_neg, left_pos) + n_right * gini(right_neg, right_pos)) / n
}

fn offer(best: &mut Option<Split>, candidate: Split) {
    let better = match best {
        None => true,
        Some(b) => candidate.score < b.score,
    };
    if better {
        *best = Some(candidate);
    }
}

/// Evaluate every midpoint between consecutive distinct sorted values.
fn sweep_midpoints(column: &[(f64, u8)], total_pos: usize, feature: usize, best: &mut Option<Split>) {
    let n = column.len();
    let mut left_pos = 0usize;
    let mut left_n = 0usize;
    for i in 0..n - 1 {
        left_n += 1;
        left_pos += column[i].1 as usize;
        if column[i].0 == column[i + 1].0 {
            continue;
        }
        let threshold = (column[i].0 + column[i + 1].0) / 2.0;
        let left_neg = left_n - left_pos;
        let right_pos = total_pos - left_pos;
        let right_neg = (n - left_n) - right_pos;
        let score = weighted_gini(left_neg, left_pos, right_neg, right_pos);
        offer(
            best,
            Split {
                feature,
                threshold,
                score,
            },
        );
    }
}

/// Draw one threshold uniformly inside the feature's (min, max) span within
/// the node; constant features yield no candidate.
fn sweep_random_threshold(
    column: &[(f64, u8)],
    total_pos: usize,
    feature: usize,
    rng: &mut ChaCha8Rng,
    best: &mut Option<Split>,
) {
    let min = column.first().unwrap().0;
    let max = column.last().unwrap().0;
    if !(max > min) {
        return;
    }
    let mut threshold = f64::NAN;
    for _ in 0..64 {
        let draw = min + rng.random::<f64>() * (max - min);
        if draw > min && draw < max {
            threshold = draw;
            break;
        }
    }
    if threshold.is_nan() {
        return;
    }
    let mut left_pos = 0usize;
    let mut left_n = 0usize;
    for &(value, label) in column {
        if value <= threshold {
            left_n += 1;
            left_pos += label as usize;
        } else {
            break;
        }
    }
    let left_neg = left_n - left_pos;
    let right_pos = total_pos - left_pos;
    let right_neg = (column.len() - left_n) - right_pos;
    let score = weighted_gini(left_neg, left_pos, right_neg, right_pos);
    offer(
        best,
        Split {
            feature,
            threshold,
            score,
        },
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{train as train_model, LearnerKind, LearnerSpec};
    use crate::testutil::{dataset_1d, dataset_from_rows};

    #[test]
    fn gini_values() {
        assert_eq!(gini(2, 2), 0.5);
        assert_eq!(gini(4, 0), 0.0);
        assert_eq!(gini(0, 3), 0.0);
        assert!((gini(3, 1) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn root_split_on_separable_column() {
        let data = dataset_1d(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]);
        let params = train(&data, &TreeHyper::default()).unwrap();
        let ModelParams::Tree { root } = &params else {
            panic!("expected tree params");
        };
        match root {
            TreeNode::Internal {
                feature,
                threshold,
                left,
                right,
            } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
                assert_eq!(**left, TreeNode::Leaf { label: 0, fraction: 0.0 });
                assert_eq!(**right, TreeNode::Leaf { label: 1, fraction: 1.0 });
            }
            other => panic!("expected internal root, got {other:?}"),
        }
        assert_eq!(root.depth(), 1);
    }

    #[test]
    fn xor_solved_at_depth_two() {
        let data = dataset_from_rows(
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            &[0, 1, 1, 0],
        );
        let model = train_model(&LearnerSpec::new(LearnerKind::Tree, 0), &data).unwrap();
        assert_eq!(model.predict(&data.features).unwrap(), data.labels);
    }

    #[test]
    fn max_depth_limits_growth() {
        let data = dataset_from_rows(
            vec![
                vec![0.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![1.0, 1.0],
            ],
            &[0, 1, 1, 0],
        );
        let params = train(
            &data,
            &TreeHyper {
                max_depth: 1,
                min_samples_split: 2,
            },
        )
        .unwrap();
        let ModelParams::Tree { root } = &params else {
            panic!("expected tree params");
        };
        assert!(root.depth() <= 1);
    }

    #[test]
    fn training_rows_get_their_leaf_majority_label() {
        let data = dataset_from_rows(
            vec![
                vec![0.1, 3.0],
                vec![0.4, 2.0],
                vec![0.35, 7.0],
                vec![0.8, 1.0],
                vec![0.6, 4.0],
                vec![0.55, 5.0],
            ],
            &[0, 0, 1, 1, 1, 0],
        );
        let params = train(
            &data,
            &TreeHyper {
                max_depth: 2,
                min_samples_split: 3,
            },
        )
        .unwrap();
        let ModelParams::Tree { root } = &params else {
            panic!("expected tree params");
        };
        for r in 0..data.n_samples() {
            let (label, fraction) = root.leaf_for(data.features.row(r));
            assert_eq!(label, u8::from(fraction > 0.5));
        }
    }
}
