//! The seven classifiers behind one train / predict / score contract.
//!
//! Every learner trains from a [`Dataset`] and produces a [`TrainedModel`]
//! whose `predict` returns hard 0/1 labels and whose `decision_score`
//! returns a real value usable for ROC construction. The two are tied by
//! the invariant `predict(x) == (score(x) > decision_threshold)`.

pub mod adaboost;
pub mod forest;
pub mod knn;
pub mod logistic;
pub mod svm;
pub mod tree;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub use adaboost::Stump;
pub use knn::Metric;
pub use tree::TreeNode;

/// The seven supported classifier families, in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LearnerKind {
    #[serde(rename = "lr")]
    Logistic,
    #[serde(rename = "svm")]
    Svm,
    #[serde(rename = "dt")]
    Tree,
    #[serde(rename = "rf")]
    Forest,
    #[serde(rename = "et")]
    ExtraTrees,
    #[serde(rename = "knn")]
    Knn,
    #[serde(rename = "ada")]
    AdaBoost,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 7] = [
        LearnerKind::Logistic,
        LearnerKind::Svm,
        LearnerKind::Tree,
        LearnerKind::Forest,
        LearnerKind::ExtraTrees,
        LearnerKind::Knn,
        LearnerKind::AdaBoost,
    ];

    /// Short CLI/file token.
    pub fn token(self) -> &'static str {
        match self {
            LearnerKind::Logistic => "lr",
            LearnerKind::Svm => "svm",
            LearnerKind::Tree => "dt",
            LearnerKind::Forest => "rf",
            LearnerKind::ExtraTrees => "et",
            LearnerKind::Knn => "knn",
            LearnerKind::AdaBoost => "ada",
        }
    }

    pub fn from_token(token: &str) -> Option<LearnerKind> {
        LearnerKind::ALL.into_iter().find(|k| k.token() == token)
    }

    /// Human-readable name used in log output.
    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Logistic => "logistic regression",
            LearnerKind::Svm => "linear SVM",
            LearnerKind::Tree => "decision tree",
            LearnerKind::Forest => "random forest",
            LearnerKind::ExtraTrees => "extra trees",
            LearnerKind::Knn => "k-nearest neighbors",
            LearnerKind::AdaBoost => "AdaBoost",
        }
    }

    /// Hyperparameter names accepted by this learner.
    fn hyper_names(self) -> &'static [&'static str] {
        match self {
            LearnerKind::Logistic => &["learning_rate", "epochs", "l2"],
            LearnerKind::Svm => &["lambda", "epochs"],
            LearnerKind::Tree => &["max_depth", "min_samples_split"],
            LearnerKind::Forest => &["n_trees", "z_features", "max_depth", "bootstrap"],
            LearnerKind::ExtraTrees => &["n_trees", "z_features", "max_depth"],
            LearnerKind::Knn => &["k", "metric", "p"],
            LearnerKind::AdaBoost => &["n_rounds"],
        }
    }
}

/// A hyperparameter override value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HyperValue {
    Number(f64),
    Text(String),
}

/// A learner choice with explicit hyperparameter overrides and a seed.
/// Unknown hyperparameter names are rejected when set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub seed: u64,
    #[serde(default)]
    overrides: BTreeMap<String, HyperValue>,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind, seed: u64) -> LearnerSpec {
        LearnerSpec {
            kind,
            seed,
            overrides: BTreeMap::new(),
        }
    }

    /// Set one hyperparameter override. The name must be known to the
    /// learner kind.
    pub fn set(&mut self, name: &str, value: HyperValue) -> Result<()> {
        if !self.kind.hyper_names().contains(&name) {
            return Err(Error::Param(format!(
                "unknown hyperparameter `{name}` for {} (expected one of: {})",
                self.kind.name(),
                self.kind.hyper_names().join(", ")
            )));
        }
        self.overrides.insert(name.to_string(), value);
        Ok(())
    }

    /// Builder-style [`LearnerSpec::set`].
    pub fn with(mut self, name: &str, value: HyperValue) -> Result<LearnerSpec> {
        self.set(name, value)?;
        Ok(self)
    }

    pub fn with_number(self, name: &str, value: f64) -> Result<LearnerSpec> {
        self.with(name, HyperValue::Number(value))
    }

    pub fn overrides(&self) -> &BTreeMap<String, HyperValue> {
        &self.overrides
    }

    /// Re-check override names, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        for name in self.overrides.keys() {
            if !self.kind.hyper_names().contains(&name.as_str()) {
                return Err(Error::Param(format!(
                    "unknown hyperparameter `{name}` for {}",
                    self.kind.name()
                )));
            }
        }
        Ok(())
    }

    fn number(&self, name: &str) -> Result<Option<f64>> {
        match self.overrides.get(name) {
            None => Ok(None),
            Some(HyperValue::Number(v)) => Ok(Some(*v)),
            Some(HyperValue::Text(t)) => Err(Error::Param(format!(
                "hyperparameter `{name}` expects a number, got `{t}`"
            ))),
        }
    }

    fn positive_int(&self, name: &str, default: usize) -> Result<usize> {
        match self.number(name)? {
            None => Ok(default),
            Some(v) if v >= 1.0 && v.fract() == 0.0 && v <= usize::MAX as f64 => Ok(v as usize),
            Some(v) => Err(Error::Param(format!(
                "hyperparameter `{name}` must be a positive integer, got {v}"
            ))),
        }
    }

    fn positive_real(&self, name: &str, default: f64) -> Result<f64> {
        match self.number(name)? {
            None => Ok(default),
            Some(v) if v > 0.0 && v.is_finite() => Ok(v),
            Some(v) => Err(Error::Param(format!(
                "hyperparameter `{name}` must be positive, got {v}"
            ))),
        }
    }

    fn nonnegative_real(&self, name: &str, default: f64) -> Result<f64> {
        match self.number(name)? {
            None => Ok(default),
            Some(v) if v >= 0.0 && v.is_finite() => Ok(v),
            Some(v) => Err(Error::Param(format!(
                "hyperparameter `{name}` must be nonnegative, got {v}"
            ))),
        }
    }

    pub fn logistic_hyper(&self) -> Result<logistic::LogisticHyper> {
        Ok(logistic::LogisticHyper {
            learning_rate: self.positive_real("learning_rate", 0.1)?,
            epochs: self.positive_int("epochs", 500)?,
            l2: self.nonnegative_real("l2", 1e-4)?,
        })
    }

    pub fn svm_hyper(&self) -> Result<svm::SvmHyper> {
        // The lambda > 0 check happens in svm::train so that a zero value
        // reported there names the parameter.
        let lambda = match self.number("lambda")? {
            None => 1e-3,
            Some(v) => v,
        };
        Ok(svm::SvmHyper {
            lambda,
            epochs: self.positive_int("epochs", 200)?,
        })
    }

    pub fn tree_hyper(&self) -> Result<tree::TreeHyper> {
        Ok(tree::TreeHyper {
            max_depth: self.positive_int("max_depth", 8)?,
            min_samples_split: self.positive_int("min_samples_split", 2)?,
        })
    }

    pub fn forest_hyper(&self) -> Result<forest::ForestHyper> {
        let bootstrap = match self.number("bootstrap")? {
            None => true,
            Some(v) if v == 0.0 => false,
            Some(v) if v == 1.0 => true,
            Some(v) => {
                return Err(Error::Param(format!(
                    "hyperparameter `bootstrap` must be 0 or 1, got {v}"
                )))
            }
        };
        Ok(forest::ForestHyper {
            n_trees: self.positive_int("n_trees", 100)?,
            z_features: self.optional_positive_int("z_features")?,
            max_depth: self.optional_positive_int("max_depth")?,
            bootstrap,
        })
    }

    pub fn extra_trees_hyper(&self) -> Result<forest::ExtraTreesHyper> {
        Ok(forest::ExtraTreesHyper {
            n_trees: self.positive_int("n_trees", 100)?,
            z_features: self.optional_positive_int("z_features")?,
            max_depth: self.optional_positive_int("max_depth")?,
        })
    }

    fn optional_positive_int(&self, name: &str) -> Result<Option<usize>> {
        match self.number(name)? {
            None => Ok(None),
            Some(v) if v >= 1.0 && v.fract() == 0.0 => Ok(Some(v as usize)),
            Some(v) => Err(Error::Param(format!(
                "hyperparameter `{name}` must be a positive integer, got {v}"
            ))),
        }
    }

    pub fn knn_hyper(&self) -> Result<knn::KnnHyper> {
        let k = self.positive_int("k", 5)?;
        let p = self.positive_real("p", 2.0)?;
        let metric = match self.overrides.get("metric") {
            None => knn::Metric::Euclidean,
            Some(HyperValue::Text(name)) => match name.as_str() {
                "euclidean" => knn::Metric::Euclidean,
                "manhattan" => knn::Metric::Manhattan,
                "minkowski" => {
                    if p < 1.0 {
                        return Err(Error::Param(format!(
                            "minkowski order p must be >= 1, got {p}"
                        )));
                    }
                    knn::Metric::Minkowski(p)
                }
                "hamming" => knn::Metric::Hamming,
                other => {
                    return Err(Error::Param(format!(
                        "unknown metric `{other}` (expected euclidean, manhattan, minkowski or hamming)"
                    )))
                }
            },
            Some(HyperValue::Number(v)) => {
                return Err(Error::Param(format!(
                    "hyperparameter `metric` expects a name, got {v}"
                )))
            }
        };
        Ok(knn::KnnHyper { k, metric })
    }

    pub fn adaboost_hyper(&self) -> Result<adaboost::AdaBoostHyper> {
        Ok(adaboost::AdaBoostHyper {
            n_rounds: self.positive_int("n_rounds", 50)?,
        })
    }
}

/// Learner-specific trained parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Logistic {
        bias: f64,
        weights: Vec<f64>,
    },
    Svm {
        bias: f64,
        weights: Vec<f64>,
    },
    Tree {
        root: TreeNode,
    },
    Forest {
        trees: Vec<TreeNode>,
    },
    ExtraTrees {
        trees: Vec<TreeNode>,
    },
    Knn {
        features: Matrix,
        labels: Vec<u8>,
        k: usize,
        metric: Metric,
    },
    AdaBoost {
        stumps: Vec<Stump>,
        alphas: Vec<f64>,
    },
}

/// A trained classifier: the spec it was trained from plus its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: LearnerSpec,
    n_features: usize,
    params: ModelParams,
}

/// Train the learner described by `spec` on `data`.
pub fn train(spec: &LearnerSpec, data: &Dataset) -> Result<TrainedModel> {
    if data.n_samples() == 0 {
        return Err(Error::Param("training set is empty".into()));
    }
    spec.validate()?;
    let params = match spec.kind {
        LearnerKind::Logistic => logistic::train(data, &spec.logistic_hyper()?)?,
        LearnerKind::Svm => svm::train(data, &spec.svm_hyper()?, spec.seed)?,
        LearnerKind::Tree => tree::train(data, &spec.tree_hyper()?)?,
        LearnerKind::Forest => forest::train_forest(data, &spec.forest_hyper()?, spec.seed)?,
        LearnerKind::ExtraTrees => {
            forest::train_extra_trees(data, &spec.extra_trees_hyper()?, spec.seed)?
        }
        LearnerKind::Knn => knn::train(data, &spec.knn_hyper()?)?,
        LearnerKind::AdaBoost => adaboost::train(data, &spec.adaboost_hyper()?)?,
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        n_features: data.n_features(),
        params,
    })
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Score above which `predict` returns 1: 0.5 for probability and
    /// vote-fraction scores, 0 for margin scores.
    pub fn decision_threshold(&self) -> f64 {
        match self.params {
            ModelParams::Logistic { .. }
            | ModelParams::Tree { .. }
            | ModelParams::Forest { .. }
            | ModelParams::ExtraTrees { .. }
            | ModelParams::Knn { .. } => 0.5,
            ModelParams::Svm { .. } | ModelParams::AdaBoost { .. } => 0.0,
        }
    }

    /// Real-valued decision score per row.
    pub fn decision_score(&self, features: &Matrix) -> Result<Vec<f64>> {
        if features.cols() != self.n_features {
            return Err(Error::Shape(format!(
                "model expects {} features, input has {}",
                self.n_features,
                features.cols()
            )));
        }
        Ok(features.iter_rows().map(|row| self.score_row(row)).collect())
    }

    /// Hard 0/1 label per row; 1 iff the score exceeds the decision
    /// threshold.
    pub fn predict(&self, features: &Matrix) -> Result<Vec<u8>> {
        let threshold = self.decision_threshold();
        Ok(self
            .decision_score(features)?
            .into_iter()
            .map(|s| u8::from(s > threshold))
            .collect())
    }

    fn score_row(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Logistic { bias, weights } => {
                logistic::sigmoid(bias + dot(weights, row))
            }
            ModelParams::Svm { bias, weights } => bias + dot(weights, row),
            ModelParams::Tree { root } => root.leaf_for(row).1,
            ModelParams::Forest { trees } | ModelParams::ExtraTrees { trees } => {
                let votes = trees.iter().filter(|t| t.leaf_for(row).0 == 1).count();
                votes as f64 / trees.len() as f64
            }
            ModelParams::Knn {
                features,
                labels,
                k,
                metric,
            } => knn::vote_fraction(features, labels, *k, *metric, row),
            ModelParams::AdaBoost { stumps, alphas } => stumps
                .iter()
                .zip(alphas)
                .map(|(s, a)| a * s.classify(row) as f64)
                .sum(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const MODEL_FORMAT: &str = "survbench-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    /// Serialize to the versioned JSON model document. Floating-point
    /// values round-trip exactly.
    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
    }

    /// Parse a model document produced by [`TrainedModel::to_json`].
    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let doc: ModelDocument = serde_json::from_str(text)
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!(
                "unexpected document format `{}`",
                doc.format
            )));
        }
        if doc.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {} (supported: {MODEL_VERSION})",
                doc.version
            )));
        }
        doc.model.spec.validate()?;
        Ok(doc.model)
    }
}
