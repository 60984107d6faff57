//! Shared helpers for unit tests.

use crate::data::{Dataset, FeatureKind, FeatureMeta, ImputeValue};
use crate::matrix::Matrix;

pub(crate) fn numeric_meta(name: &str) -> FeatureMeta {
    FeatureMeta {
        name: name.into(),
        source: name.into(),
        kind: FeatureKind::Numeric,
        categories: Vec::new(),
        impute: ImputeValue::Number(0.0),
        scale: None,
    }
}

/// Dataset with the given feature rows and labels; columns named `x0..`.
pub(crate) fn dataset_from_rows(rows: Vec<Vec<f64>>, labels: &[u8]) -> Dataset {
    let cols = rows.first().map_or(0, |r| r.len());
    let meta = (0..cols).map(|c| numeric_meta(&format!("x{c}"))).collect();
    let ids = (0..rows.len()).map(|i| i.to_string()).collect();
    Dataset::new(Matrix::from_rows(rows).unwrap(), labels.to_vec(), meta, ids).unwrap()
}

/// Single-column dataset.
pub(crate) fn dataset_1d(values: &[f64], labels: &[u8]) -> Dataset {
    dataset_from_rows(values.iter().map(|&v| vec![v]).collect(), labels)
}
