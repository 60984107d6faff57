//! Clinical CSV ingestion: parsing, imputation, one-hot encoding,
//! standardization and train/test splitting.
//!
//! The encoding workflow is fit/apply: [`fit_encoder`] learns imputation
//! values, category lists and the target mapping from a training table, and
//! [`Encoder::encode`] applies them to any compatible table. Statistics are
//! always learned on training data only.

use std::collections::BTreeMap;
use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Tokens treated as a missing cell, compared case-insensitively.
const MISSING_TOKENS: [&str; 3] = ["na", "nan", "null"];

/// Column roles and preprocessing settings for a CSV table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableConfig {
    /// Name of the binary target column.
    pub target: String,
    /// Raw target value mapped to label 1. Defaults to the
    /// lexicographically larger of the observed values.
    pub positive_value: Option<String>,
    /// Column holding sample identifiers; row numbers are used when absent.
    pub id_column: Option<String>,
    /// Columns excluded from the feature set.
    pub drop_columns: Vec<String>,
    /// Imputation policy for numeric columns.
    pub policy: ImputePolicy,
}

impl TableConfig {
    pub fn new(target: impl Into<String>) -> TableConfig {
        TableConfig {
            target: target.into(),
            positive_value: None,
            id_column: None,
            drop_columns: Vec::new(),
            policy: ImputePolicy::default(),
        }
    }
}

/// Fill rule for missing numeric cells. Categorical columns always use the
/// mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImputePolicy {
    #[default]
    Median,
    Mean,
}

/// A parsed CSV table. Cells are `None` when the source value was empty or
/// one of the missing tokens.
#[derive(Clone, Debug)]
pub struct RawTable {
    header: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
}

impl RawTable {
    /// Build a table from parts, enforcing unique column names and uniform
    /// row width.
    pub fn new(header: Vec<String>, rows: Vec<Vec<Option<String>>>) -> Result<RawTable> {
        let mut seen = std::collections::BTreeSet::new();
        for name in &header {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate column `{name}`")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(Error::Parse {
                    row: i + 1,
                    msg: format!("expected {} cells, found {}", header.len(), row.len()),
                });
            }
        }
        Ok(RawTable { header, rows })
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cell at (`row`, `col`), `None` when missing.
    pub fn cell(&self, row: usize, col: usize) -> Option<&str> {
        self.rows[row][col].as_deref()
    }

    /// All cells of the named column.
    pub fn column(&self, name: &str) -> Option<Vec<Option<&str>>> {
        let idx = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[idx].as_deref()).collect())
    }

    /// New table keeping only the listed rows, in order.
    pub fn take_rows(&self, indices: &[usize]) -> RawTable {
        RawTable {
            header: self.header.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || MISSING_TOKENS.iter().any(|t| cell.eq_ignore_ascii_case(t))
}

/// Parse UTF-8 CSV with a header row into a [`RawTable`].
///
/// Empty strings and the tokens `NA`, `NaN`, `null` (case-insensitive)
/// become missing cells. The configured target column must be present.
pub fn load_csv<R: Read>(source: R, config: &TableConfig) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            msg: e.to_string(),
        })?
        .iter()
        .map(|s| s.to_string())
        .collect();

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            row: i + 1,
            msg: e.to_string(),
        })?;
        let row: Vec<Option<String>> = record
            .iter()
            .map(|cell| {
                if is_missing(cell) {
                    None
                } else {
                    Some(cell.to_string())
                }
            })
            .collect();
        rows.push(row);
    }

    let table = RawTable::new(header, rows)?;
    if table.column_index(&config.target).is_none() {
        return Err(Error::Schema(format!(
            "target column `{}` not found",
            config.target
        )));
    }
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// Fill value learned from training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ImputeValue {
    Number(f64),
    Category(String),
}

/// Standardization statistics of a numeric column, learned on training data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub mean: f64,
    pub stddev: f64,
}

/// Per-column metadata. Produced by [`fit_encoder`] for source columns and
/// carried (one entry per encoded column) on every [`Dataset`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    /// Encoded column name (`age`, `cohort=3`, ...).
    pub name: String,
    /// Source CSV column the encoded column derives from.
    pub source: String,
    pub kind: FeatureKind,
    /// Ordered distinct categories; nonempty iff `kind` is categorical.
    pub categories: Vec<String>,
    pub impute: ImputeValue,
    /// Set once the column has been standardized.
    pub scale: Option<ColumnScale>,
}

/// Mapping from raw target values to the binary label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetMap {
    /// Raw value mapped to label 1.
    pub positive: String,
    /// The other observed value (absent when the target is single-valued).
    pub negative: Option<String>,
}

/// Fitted preprocessing state: per-column metadata plus the target mapping.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Encoder {
    pub target_name: String,
    pub target: TargetMap,
    pub id_column: Option<String>,
    /// Kept source columns, in table order.
    pub columns: Vec<FeatureMeta>,
    /// Names of columns dropped at fit time, with the reason.
    pub dropped: Vec<String>,
}

/// Learn imputation values, category lists and the target mapping from a
/// training table.
///
/// Numeric columns (every non-missing cell parses as a finite number) get a
/// median or mean fill value per the policy; the rest are categorical with a
/// mode fill value and a sorted category list. Constant and all-missing
/// columns are dropped with a warning.
pub fn fit_encoder(table: &RawTable, config: &TableConfig) -> Result<Encoder> {
    let target_idx = table
        .column_index(&config.target)
        .ok_or_else(|| Error::Schema(format!("target column `{}` not found", config.target)))?;

    if let Some(id) = &config.id_column {
        if table.column_index(id).is_none() {
            return Err(Error::Schema(format!("id column `{id}` not found")));
        }
    }
    for name in &config.drop_columns {
        if table.column_index(name).is_none() {
            return Err(Error::Schema(format!("drop column `{name}` not found")));
        }
    }

    let target = fit_target(table, target_idx, config.positive_value.as_deref())?;

    let mut columns = Vec::new();
    let mut dropped = Vec::new();
    for (idx, name) in table.header.iter().enumerate() {
        if idx == target_idx
            || Some(name) == config.id_column.as_ref()
            || config.drop_columns.contains(name)
        {
            continue;
        }
        match fit_column(table, idx, name, config.policy) {
            Some(meta) => columns.push(meta),
            None => {
                log::warn!("dropping column `{name}`: constant or all-missing");
                dropped.push(name.clone());
            }
        }
    }

    Ok(Encoder {
        target_name: config.target.clone(),
        target,
        id_column: config.id_column.clone(),
        columns,
        dropped,
    })
}

/// Learn the target mapping alone: which raw value maps to label 1.
pub fn fit_target_map(table: &RawTable, config: &TableConfig) -> Result<TargetMap> {
    let target_idx = table
        .column_index(&config.target)
        .ok_or_else(|| Error::Schema(format!("target column `{}` not found", config.target)))?;
    fit_target(table, target_idx, config.positive_value.as_deref())
}

fn fit_target(table: &RawTable, target_idx: usize, positive: Option<&str>) -> Result<TargetMap> {
    let mut distinct: Vec<String> = Vec::new();
    for row in &table.rows {
        if let Some(v) = &row[target_idx] {
            if !distinct.iter().any(|d| d == v) {
                distinct.push(v.clone());
            }
        }
    }
    distinct.sort();
    match distinct.len() {
        0 => Err(Error::Schema("target column has no values".into())),
        1 | 2 => {
            let default_positive = distinct.last().unwrap().clone();
            let positive = match positive {
                Some(p) => {
                    if !distinct.iter().any(|d| d == p) {
                        return Err(Error::Schema(format!(
                            "positive value `{p}` not found in target column (observed: {})",
                            distinct.join(", ")
                        )));
                    }
                    p.to_string()
                }
                None => default_positive,
            };
            let negative = distinct.into_iter().find(|d| *d != positive);
            Ok(TargetMap { positive, negative })
        }
        n => Err(Error::Schema(format!(
            "target column has {n} distinct values, expected at most 2"
        ))),
    }
}

/// Fit one feature column; `None` means the column carries no information
/// and is dropped.
fn fit_column(
    table: &RawTable,
    idx: usize,
    name: &str,
    policy: ImputePolicy,
) -> Option<FeatureMeta> {
    let cells: Vec<&str> = table
        .rows
        .iter()
        .filter_map(|r| r[idx].as_deref())
        .collect();
    if cells.is_empty() {
        return None;
    }

    let numeric: Option<Vec<f64>> = cells
        .iter()
        .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();

    if let Some(mut values) = numeric {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if values.first() == values.last() {
            return None; // constant
        }
        let fill = match policy {
            ImputePolicy::Median => median_of_sorted(&values),
            ImputePolicy::Mean => values.iter().sum::<f64>() / values.len() as f64,
        };
        Some(FeatureMeta {
            name: name.to_string(),
            source: name.to_string(),
            kind: FeatureKind::Numeric,
            categories: Vec::new(),
            impute: ImputeValue::Number(fill),
            scale: None,
        })
    } else {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for c in &cells {
            *counts.entry(c).or_insert(0) += 1;
        }
        if counts.len() < 2 {
            return None; // constant
        }
        // Mode; ties resolved toward the lexicographically smaller value.
        let mode = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(v, _)| v.to_string())
            .unwrap();
        let categories: Vec<String> = counts.keys().map(|v| v.to_string()).collect();
        Some(FeatureMeta {
            name: name.to_string(),
            source: name.to_string(),
            kind: FeatureKind::Categorical,
            categories,
            impute: ImputeValue::Category(mode),
            scale: None,
        })
    }
}

fn median_of_sorted(values: &[f64]) -> f64 {
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

impl Encoder {
    /// Total number of encoded columns this encoder produces.
    pub fn n_encoded_columns(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c.kind {
                FeatureKind::Numeric => 1,
                FeatureKind::Categorical => c.categories.len(),
            })
            .sum()
    }

    /// Metadata for each encoded column, expanding categoricals one column
    /// per category.
    pub fn encoded_meta(&self) -> Vec<FeatureMeta> {
        let mut meta = Vec::with_capacity(self.n_encoded_columns());
        for col in &self.columns {
            match col.kind {
                FeatureKind::Numeric => meta.push(col.clone()),
                FeatureKind::Categorical => {
                    for cat in &col.categories {
                        meta.push(FeatureMeta {
                            name: format!("{}={}", col.name, cat),
                            source: col.name.clone(),
                            kind: FeatureKind::Categorical,
                            categories: vec![cat.clone()],
                            impute: col.impute.clone(),
                            scale: None,
                        });
                    }
                }
            }
        }
        meta
    }

    /// Apply the fitted encoding to a table with compatible columns.
    ///
    /// Missing cells are imputed, categoricals are one-hot expanded (unseen
    /// categories encode to all zeros), and rows with a missing target cell
    /// are skipped with a warning.
    pub fn encode(&self, table: &RawTable) -> Result<Dataset> {
        let target_idx = table.column_index(&self.target_name).ok_or_else(|| {
            Error::Schema(format!("target column `{}` not found", self.target_name))
        })?;
        let id_idx = match &self.id_column {
            Some(id) => Some(
                table
                    .column_index(id)
                    .ok_or_else(|| Error::Schema(format!("id column `{id}` not found")))?,
            ),
            None => None,
        };
        let source_idx: Vec<usize> = self
            .columns
            .iter()
            .map(|c| {
                table
                    .column_index(&c.name)
                    .ok_or_else(|| Error::Schema(format!("column `{}` not found", c.name)))
            })
            .collect::<Result<_>>()?;

        let n_cols = self.n_encoded_columns();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(table.n_rows());
        let mut labels: Vec<u8> = Vec::with_capacity(table.n_rows());
        let mut sample_ids: Vec<String> = Vec::with_capacity(table.n_rows());
        let mut skipped = 0usize;

        for (r, row) in table.rows.iter().enumerate() {
            let label = match &row[target_idx] {
                None => {
                    skipped += 1;
                    continue;
                }
                Some(v) if *v == self.target.positive => 1,
                Some(v) if Some(v) == self.target.negative.as_ref() => 0,
                Some(v) => {
                    return Err(Error::Encode {
                        row: r + 1,
                        column: self.target_name.clone(),
                        msg: format!("unseen target value `{v}`"),
                    })
                }
            };

            let mut encoded = Vec::with_capacity(n_cols);
            for (col, &idx) in self.columns.iter().zip(&source_idx) {
                encode_cell(col, row[idx].as_deref(), r, &mut encoded)?;
            }
            rows.push(encoded);
            labels.push(label);
            sample_ids.push(match id_idx {
                Some(i) => row[i].clone().unwrap_or_else(|| r.to_string()),
                None => r.to_string(),
            });
        }

        if skipped > 0 {
            log::warn!("skipped {skipped} rows with a missing target value");
        }

        Dataset::new(
            Matrix::from_rows(rows)?,
            labels,
            self.encoded_meta(),
            sample_ids,
        )
    }
}

fn encode_cell(col: &FeatureMeta, cell: Option<&str>, row: usize, out: &mut Vec<f64>) -> Result<()> {
    match col.kind {
        FeatureKind::Numeric => {
            let value = match cell {
                None => match &col.impute {
                    ImputeValue::Number(v) => *v,
                    ImputeValue::Category(_) => unreachable!("numeric column with text impute"),
                },
                Some(s) => {
                    let v: f64 = s.parse().map_err(|_| Error::Encode {
                        row: row + 1,
                        column: col.name.clone(),
                        msg: format!("`{s}` is not numeric"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Encode {
                            row: row + 1,
                            column: col.name.clone(),
                            msg: format!("`{s}` is not finite"),
                        });
                    }
                    v
                }
            };
            out.push(value);
        }
        FeatureKind::Categorical => {
            let value = match cell {
                Some(s) => s,
                None => match &col.impute {
                    ImputeValue::Category(v) => v.as_str(),
                    ImputeValue::Number(_) => unreachable!("categorical column with numeric impute"),
                },
            };
            // Unseen categories encode to all zeros.
            for cat in &col.categories {
                out.push(if cat == value { 1.0 } else { 0.0 });
            }
        }
    }
    Ok(())
}

/// Encoded feature matrix with binary labels and aligned column metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Matrix,
    /// One label per row; 1 = positive class (survived).
    pub labels: Vec<u8>,
    /// One entry per encoded column.
    pub meta: Vec<FeatureMeta>,
    pub sample_ids: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Matrix,
        labels: Vec<u8>,
        meta: Vec<FeatureMeta>,
        sample_ids: Vec<String>,
    ) -> Result<Dataset> {
        if features.rows() != labels.len() || features.rows() != sample_ids.len() {
            return Err(Error::Shape(format!(
                "{} feature rows, {} labels, {} sample ids",
                features.rows(),
                labels.len(),
                sample_ids.len()
            )));
        }
        if features.rows() > 0 && features.cols() != meta.len() {
            return Err(Error::Shape(format!(
                "{} feature columns but {} metadata entries",
                features.cols(),
                meta.len()
            )));
        }
        if !features.is_finite() {
            return Err(Error::Shape("feature matrix contains non-finite values".into()));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::Shape("labels must be 0 or 1".into()));
        }
        Ok(Dataset {
            features,
            labels,
            meta,
            sample_ids,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    /// (negative, positive) class counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - pos, pos)
    }

    /// New dataset keeping only the listed rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.take_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            meta: self.meta.clone(),
            sample_ids: indices.iter().map(|&i| self.sample_ids[i].clone()).collect(),
        }
    }

    /// New dataset keeping only the listed columns, in order.
    pub fn select_columns(&self, columns: &[usize]) -> Dataset {
        Dataset {
            features: self.features.take_columns(columns),
            labels: self.labels.clone(),
            meta: columns.iter().map(|&c| self.meta[c].clone()).collect(),
            sample_ids: self.sample_ids.clone(),
        }
    }
}

/// Columns with a train stddev below this are left unscaled.
const DEGENERATE_STDDEV: f64 = 1e-12;

/// Standardize numeric columns of `train` and `test` to zero mean and unit
/// stddev using training statistics only. One-hot columns are untouched;
/// near-constant columns are left unscaled.
pub fn standardize_fit_apply(mut train: Dataset, mut test: Dataset) -> Result<(Dataset, Dataset)> {
    if train.n_features() != test.n_features() {
        return Err(Error::Shape(format!(
            "train has {} columns, test has {}",
            train.n_features(),
            test.n_features()
        )));
    }
    for (a, b) in train.meta.iter().zip(test.meta.iter()) {
        if a.name != b.name {
            return Err(Error::Shape(format!(
                "column mismatch: `{}` vs `{}`",
                a.name, b.name
            )));
        }
    }
    if train.n_samples() == 0 {
        return Err(Error::Shape("empty training set".into()));
    }

    let n = train.n_samples() as f64;
    for c in 0..train.n_features() {
        if train.meta[c].kind != FeatureKind::Numeric {
            continue;
        }
        let mean = (0..train.n_samples()).map(|r| train.features.get(r, c)).sum::<f64>() / n;
        let var = (0..train.n_samples())
            .map(|r| {
                let d = train.features.get(r, c) - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        let stddev = var.sqrt();
        if stddev < DEGENERATE_STDDEV {
            continue;
        }
        let scale = ColumnScale { mean, stddev };
        for r in 0..train.n_samples() {
            train.features.set(r, c, (train.features.get(r, c) - mean) / stddev);
        }
        for r in 0..test.n_samples() {
            test.features.set(r, c, (test.features.get(r, c) - mean) / stddev);
        }
        train.meta[c].scale = Some(scale);
        test.meta[c].scale = Some(scale);
    }
    Ok((train, test))
}

/// Deterministic seeded train/test partition of row indices.
///
/// With `stratified`, each class is split separately so both sides match the
/// full class ratio to within one sample per class.
pub fn split_indices(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Param(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();

    if stratified {
        for class in [0u8, 1u8] {
            let mut idx: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
            if idx.is_empty() {
                continue;
            }
            let take = (idx.len() as f64 * test_fraction).round() as usize;
            if take == 0 || take == idx.len() {
                return Err(Error::Split(format!(
                    "class {class} has {} samples; a {test_fraction} test fraction would leave one side without it",
                    idx.len()
                )));
            }
            idx.shuffle(&mut rng);
            test.extend_from_slice(&idx[..take]);
            train.extend_from_slice(&idx[take..]);
        }
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        let take = (n as f64 * test_fraction).round() as usize;
        if take == 0 || take == n {
            return Err(Error::Split(format!(
                "test fraction {test_fraction} of {n} samples leaves a side empty"
            )));
        }
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..take]);
        train.extend_from_slice(&idx[take..]);
    }

    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Partition a dataset into train and test sides. See [`split_indices`].
pub fn split(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Dataset, Dataset)> {
    let (train_idx, test_idx) = split_indices(&data.labels, test_fraction, seed, stratified)?;
    Ok((data.subset(&train_idx), data.subset(&test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::dataset_1d;

    fn table(csv: &str, target: &str) -> RawTable {
        load_csv(csv.as_bytes(), &TableConfig::new(target)).unwrap()
    }

    #[test]
    fn parses_missing_cells() {
        let t = table("a,b\n1,x\n2,\n", "a");
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.cell(0, 1), Some("x"));
        assert_eq!(t.cell(1, 1), None);
    }

    #[test]
    fn missing_tokens_case_insensitive() {
        let t = table("a,b\nNA,NaN\nnull,NULL\n", "a");
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(t.cell(r, c), None);
            }
        }
    }

    #[test]
    fn ragged_row_is_parse_error() {
        let err = load_csv("a,b\n1,2\n3\n".as_bytes(), &TableConfig::new("a")).unwrap_err();
        match err {
            Error::Parse { row, .. } => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn duplicate_column_is_schema_error() {
        let err = load_csv("a,a\n1,2\n".as_bytes(), &TableConfig::new("a")).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn missing_target_is_schema_error() {
        let err = load_csv("a,b\n1,2\n".as_bytes(), &TableConfig::new("y")).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn numeric_impute_is_median() {
        let t = table("x,y\n1,a\n2,a\n,b\n3,b\n", "y");
        let enc = fit_encoder(&t, &TableConfig::new("y")).unwrap();
        assert_eq!(enc.columns[0].impute, ImputeValue::Number(2.0));
    }

    #[test]
    fn categorical_impute_is_mode_with_sorted_categories() {
        let t = table("x,y\na,0\na,0\nb,1\n", "y");
        let enc = fit_encoder(&t, &TableConfig::new("y")).unwrap();
        let col = &enc.columns[0];
        assert_eq!(col.kind, FeatureKind::Categorical);
        assert_eq!(col.categories, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(col.impute, ImputeValue::Category("a".into()));
    }

    #[test]
    fn default_target_mapping_is_lexicographically_larger() {
        let t = table("x,status\n1,Living\n2,Died\n", "status");
        let enc = fit_encoder(&t, &TableConfig::new("status")).unwrap();
        assert_eq!(enc.target.positive, "Living");
        assert_eq!(enc.target.negative.as_deref(), Some("Died"));
    }

    #[test]
    fn positive_value_override() {
        let t = table("x,status\n1,Living\n2,Died\n", "status");
        let mut cfg = TableConfig::new("status");
        cfg.positive_value = Some("Died".into());
        let enc = fit_encoder(&t, &cfg).unwrap();
        assert_eq!(enc.target.positive, "Died");
    }

    #[test]
    fn three_valued_target_rejected() {
        let t = table("x,y\n1,a\n2,b\n3,c\n", "y");
        let err = fit_encoder(&t, &TableConfig::new("y")).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn constant_and_all_missing_columns_dropped() {
        let t = table("k,m,x,y\n5,,1,0\n5,,2,1\n5,,3,0\n", "y");
        let enc = fit_encoder(&t, &TableConfig::new("y")).unwrap();
        assert_eq!(enc.columns.len(), 1);
        assert_eq!(enc.columns[0].name, "x");
        assert_eq!(enc.dropped, vec!["k".to_string(), "m".to_string()]);
    }

    #[test]
    fn one_hot_encoding_and_unseen_category() {
        let fit = table("c,y\na,0\nb,1\n", "y");
        let enc = fit_encoder(&fit, &TableConfig::new("y")).unwrap();

        let apply = table("c,y\nb,0\nc,1\n", "y");
        let ds = enc.encode(&apply).unwrap();
        assert_eq!(ds.features.row(0), &[0.0, 1.0]); // seen `b`
        assert_eq!(ds.features.row(1), &[0.0, 0.0]); // unseen `c`
        assert_eq!(ds.meta[0].name, "c=a");
        assert_eq!(ds.meta[1].name, "c=b");
    }

    #[test]
    fn missing_numeric_cell_imputed() {
        let fit = table("x,y\n1,0\n2,1\n3,0\n", "y");
        let enc = fit_encoder(&fit, &TableConfig::new("y")).unwrap();
        let apply = table("x,y\n,1\n", "y");
        let ds = enc.encode(&apply).unwrap();
        assert_eq!(ds.features.get(0, 0), 2.0);
    }

    #[test]
    fn non_finite_numeric_cell_is_encode_error() {
        let fit = table("x,y\n1,0\n2,1\n", "y");
        let enc = fit_encoder(&fit, &TableConfig::new("y")).unwrap();
        let apply = table("x,y\ninf,0\n", "y");
        let err = enc.encode(&apply).unwrap_err();
        assert!(matches!(err, Error::Encode { .. }));
    }

    #[test]
    fn rows_with_missing_target_skipped() {
        let fit = table("x,y\n1,0\n2,1\n3,\n", "y");
        let enc = fit_encoder(&fit, &TableConfig::new("y")).unwrap();
        let ds = enc.encode(&fit).unwrap();
        assert_eq!(ds.n_samples(), 2);
    }

    #[test]
    fn standardize_two_point_column() {
        let ds = dataset_1d(&[1.0, 3.0], &[0, 1]);
        let test = dataset_1d(&[5.0], &[0]);
        let (tr, te) = standardize_fit_apply(ds, test).unwrap();
        assert_eq!(tr.features.column(0), vec![-1.0, 1.0]);
        assert_eq!(te.features.get(0, 0), 3.0); // (5 - 2) / 1
        assert_eq!(
            tr.meta[0].scale,
            Some(ColumnScale {
                mean: 2.0,
                stddev: 1.0
            })
        );
    }

    #[test]
    fn standardize_leaves_constant_column() {
        let ds = dataset_1d(&[5.0, 5.0, 5.0], &[0, 1, 0]);
        let test = dataset_1d(&[5.0], &[1]);
        let (tr, _) = standardize_fit_apply(ds, test).unwrap();
        assert_eq!(tr.features.column(0), vec![5.0, 5.0, 5.0]);
        assert_eq!(tr.meta[0].scale, None);
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_stddev() {
        let ds = dataset_1d(&[2.0, 7.0, 4.0, 9.0, 1.0], &[0, 1, 0, 1, 0]);
        let test = dataset_1d(&[3.0], &[0]);
        let (tr, _) = standardize_fit_apply(ds, test).unwrap();
        let col = tr.features.column(0);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-9);
        assert!((var.sqrt() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn split_is_exact_partition() {
        let ds = dataset_1d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0], &[0; 10]);
        let (train, test) = split(&ds, 0.2, 7, false).unwrap();
        assert_eq!(train.n_samples(), 8);
        assert_eq!(test.n_samples(), 2);
        let mut ids: Vec<&String> = train.sample_ids.iter().chain(&test.sample_ids).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 10);
    }

    #[test]
    fn stratified_split_counts() {
        let labels = [1, 1, 1, 1, 1, 1, 0, 0, 0, 0];
        let values: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ds = dataset_1d(&values, &labels);
        let (_, test) = split(&ds, 0.5, 3, true).unwrap();
        let (neg, pos) = test.class_counts();
        assert_eq!((neg, pos), (2, 3));
    }

    #[test]
    fn split_deterministic_under_seed() {
        let values: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
        let ds = dataset_1d(&values, &labels);
        let (a_train, a_test) = split(&ds, 0.3, 11, true).unwrap();
        let (b_train, b_test) = split(&ds, 0.3, 11, true).unwrap();
        assert_eq!(a_train.sample_ids, b_train.sample_ids);
        assert_eq!(a_test.sample_ids, b_test.sample_ids);
    }

    #[test]
    fn split_errors_when_class_starved() {
        let ds = dataset_1d(&[0.0, 1.0, 2.0, 3.0], &[0, 0, 0, 1]);
        let err = split(&ds, 0.25, 1, true).unwrap_err();
        assert!(matches!(err, Error::Split(_)));
    }

}
