//! Benchmark orchestration: load a clinical CSV (or synthesize a cohort),
//! encode, optionally select features, train every requested model, and
//! emit the report plus plot-ready artifacts.
//!
//! Two evaluation protocols run side by side: a seeded stratified holdout
//! split for the headline report, and a separate full-data k-fold
//! cross-validation for the per-fold accuracies. All randomness derives
//! from the single configured seed, so reruns produce byte-identical CSV
//! artifacts; `manifest.json` is the one exception since it records wall
//! -clock stage timings.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{
    fit_encoder, fit_target_map, load_csv, split_indices, standardize_fit_apply, Dataset,
    FeatureKind, FeatureMeta, ImputeValue, RawTable, TableConfig,
};
use crate::error::{Error, Result};
use crate::eval::{
    auc, confusion, cross_validate_opts, metrics, roc_curve, ConfusionMatrix, CvResult, RocCurve,
};
use crate::learners::{train, HyperValue, LearnerKind, LearnerSpec};
use crate::matrix::Matrix;
use crate::select::{score_columns, variable_scores, FeatureScore};

/// Everything one benchmark run needs. The defaults mirror the CLI.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub data_path: PathBuf,
    pub target: String,
    pub positive_value: Option<String>,
    pub id_column: Option<String>,
    pub drop_columns: Vec<String>,
    pub test_fraction: f64,
    pub k_folds: usize,
    /// Keep the k best-scoring encoded columns; `None` keeps all.
    pub select_k: Option<usize>,
    /// Requested models, evaluated and reported in [`LearnerKind::ALL`] order.
    pub models: Vec<LearnerKind>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub stratify: bool,
    pub save_models: bool,
    /// Per-model hyperparameter overrides, keyed by model token.
    pub overrides: BTreeMap<String, BTreeMap<String, HyperValue>>,
}

impl RunConfig {
    pub fn new(
        data_path: impl Into<PathBuf>,
        target: impl Into<String>,
        out_dir: impl Into<PathBuf>,
    ) -> RunConfig {
        RunConfig {
            data_path: data_path.into(),
            target: target.into(),
            positive_value: None,
            id_column: None,
            drop_columns: Vec::new(),
            test_fraction: 0.2,
            k_folds: 10,
            select_k: None,
            models: LearnerKind::ALL.to_vec(),
            seed: 42,
            out_dir: out_dir.into(),
            stratify: true,
            save_models: false,
            overrides: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Param(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.k_folds < 2 {
            return Err(Error::Param(format!(
                "k_folds must be at least 2, got {}",
                self.k_folds
            )));
        }
        if self.models.is_empty() {
            return Err(Error::Param("at least one model must be requested".into()));
        }
        if self.select_k == Some(0) {
            return Err(Error::Param("select_k must be at least 1".into()));
        }
        for token in self.overrides.keys() {
            if LearnerKind::from_token(token).is_none() {
                return Err(Error::Param(format!("unknown model token `{token}`")));
            }
        }
        Ok(())
    }

    fn table_config(&self) -> TableConfig {
        TableConfig {
            target: self.target.clone(),
            positive_value: self.positive_value.clone(),
            id_column: self.id_column.clone(),
            drop_columns: self.drop_columns.clone(),
            policy: Default::default(),
        }
    }

    /// Requested models in report order, deduplicated.
    fn ordered_models(&self) -> Vec<LearnerKind> {
        LearnerKind::ALL
            .into_iter()
            .filter(|k| self.models.contains(k))
            .collect()
    }

    fn spec_for(&self, kind: LearnerKind) -> Result<LearnerSpec> {
        let mut spec = LearnerSpec::new(kind, self.seed);
        if let Some(named) = self.overrides.get(kind.token()) {
            for (name, value) in named {
                spec.set(name, value.clone())?;
            }
        }
        Ok(spec)
    }
}

/// Holdout and cross-validation results for one model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelReport {
    pub kind: LearnerKind,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub auc: f64,
    pub cv: CvResult,
    pub confusion: ConfusionMatrix,
    pub roc: RocCurve,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

/// Run provenance: configuration echo, input fingerprint, data shape and
/// per-stage wall-clock timings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config: RunConfig,
    pub data_sha256: String,
    pub n_rows: usize,
    pub n_encoded_features: usize,
    pub n_selected_features: usize,
    pub class_counts: (usize, usize),
    pub dropped_columns: Vec<String>,
    pub timings: Vec<StageTiming>,
}

/// Full benchmark output: one [`ModelReport`] per requested model plus the
/// feature ranking and the run manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub models: Vec<ModelReport>,
    /// Per source variable (one-hot groups collapsed by max score).
    pub feature_scores: Vec<FeatureScore>,
    /// Per encoded column.
    pub column_scores: Vec<FeatureScore>,
    pub manifest: Manifest,
}

struct StageClock {
    timings: Vec<StageTiming>,
    started: Instant,
}

impl StageClock {
    fn new() -> StageClock {
        StageClock {
            timings: Vec::new(),
            started: Instant::now(),
        }
    }

    fn lap(&mut self, stage: &str) {
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            millis: self.started.elapsed().as_secs_f64() * 1e3,
        });
        self.started = Instant::now();
    }
}

/// Probe that the output directory exists (creating it if needed) and is
/// writable, before any computation starts.
fn prepare_out_dir(out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let probe = out_dir.join(".write_probe");
    fs::write(&probe, b"probe")?;
    fs::remove_file(&probe)?;
    Ok(())
}

/// Execute the full pipeline described by `config` and write all artifacts
/// to `config.out_dir`.
pub fn run_benchmark(config: &RunConfig) -> Result<BenchReport> {
    config.validate()?;
    prepare_out_dir(&config.out_dir).map_err(|e| e.in_stage("out_dir"))?;

    let mut clock = StageClock::new();
    let table_config = config.table_config();

    // Load and fingerprint the input.
    let bytes = fs::read(&config.data_path).map_err(|e| Error::from(e).in_stage("load"))?;
    let data_sha256 = hex_digest(&bytes);
    let table = load_csv(bytes.as_slice(), &table_config).map_err(|e| e.in_stage("load"))?;
    clock.lap("load");

    // Stratified holdout over rows with a present target value.
    let (labeled_rows, labels) =
        labeled_rows(&table, &table_config).map_err(|e| e.in_stage("split"))?;
    let (train_rows, test_rows) =
        split_indices(&labels, config.test_fraction, config.seed, config.stratify)
            .map_err(|e| e.in_stage("split"))?;
    let train_table = table.take_rows(&to_table_rows(&labeled_rows, &train_rows));
    let test_table = table.take_rows(&to_table_rows(&labeled_rows, &test_rows));
    clock.lap("split");

    // Fit preprocessing on the training side only.
    let encoder = fit_encoder(&train_table, &table_config).map_err(|e| e.in_stage("encode"))?;
    let train_ds = encoder.encode(&train_table).map_err(|e| e.in_stage("encode"))?;
    let test_ds = encoder.encode(&test_table).map_err(|e| e.in_stage("encode"))?;
    clock.lap("encode");

    let (train_ds, test_ds) =
        standardize_fit_apply(train_ds, test_ds).map_err(|e| e.in_stage("standardize"))?;
    clock.lap("standardize");

    // Feature scoring on the (standardized) training side.
    let column_scores = score_columns(&train_ds).map_err(|e| e.in_stage("select"))?;
    let feature_scores = variable_scores(&train_ds).map_err(|e| e.in_stage("select"))?;
    let (train_ds, test_ds, kept_names) = match config.select_k {
        None => {
            let names = train_ds.meta.iter().map(|m| m.name.clone()).collect();
            (train_ds, test_ds, names)
        }
        Some(k) => {
            if k > train_ds.n_features() {
                return Err(Error::Param(format!(
                    "select_k = {k} exceeds the {} encoded columns",
                    train_ds.n_features()
                ))
                .in_stage("select"));
            }
            let keep: Vec<usize> = (0..train_ds.n_features())
                .filter(|&c| column_scores[c].rank <= k)
                .collect();
            let names: Vec<String> = keep.iter().map(|&c| train_ds.meta[c].name.clone()).collect();
            (
                train_ds.select_columns(&keep),
                test_ds.select_columns(&keep),
                names,
            )
        }
    };
    clock.lap("select");

    // Separate protocol: k-fold CV over the full labeled data, encoded
    // with a full-table fit; scaling is refit inside each fold.
    let full_table = table.take_rows(&labeled_rows);
    let cv_encoder = fit_encoder(&full_table, &table_config).map_err(|e| e.in_stage("cv"))?;
    let cv_ds = cv_encoder.encode(&full_table).map_err(|e| e.in_stage("cv"))?;
    let cv_keep: Vec<usize> = (0..cv_ds.n_features())
        .filter(|&c| kept_names.contains(&cv_ds.meta[c].name))
        .collect();
    let cv_ds = cv_ds.select_columns(&cv_keep);
    clock.lap("cv_encode");

    let mut model_reports = Vec::new();
    for kind in config.ordered_models() {
        let stage: &'static str = kind.token();
        let spec = config.spec_for(kind).map_err(|e| e.in_stage(stage))?;
        let model = train(&spec, &train_ds).map_err(|e| e.in_stage(stage))?;

        let train_predictions = model
            .predict(&train_ds.features)
            .map_err(|e| e.in_stage(stage))?;
        let train_cm =
            confusion(&train_ds.labels, &train_predictions).map_err(|e| e.in_stage(stage))?;
        let train_accuracy = metrics(&train_cm).map_err(|e| e.in_stage(stage))?.accuracy;

        let test_predictions = model
            .predict(&test_ds.features)
            .map_err(|e| e.in_stage(stage))?;
        let test_scores = model
            .decision_score(&test_ds.features)
            .map_err(|e| e.in_stage(stage))?;
        let cm = confusion(&test_ds.labels, &test_predictions).map_err(|e| e.in_stage(stage))?;
        let m = metrics(&cm).map_err(|e| e.in_stage(stage))?;
        let roc = roc_curve(&test_ds.labels, &test_scores).map_err(|e| e.in_stage(stage))?;
        let model_auc = auc(&roc);

        let cv = cross_validate_opts(&spec, &cv_ds, config.k_folds, config.seed, config.stratify)
            .map_err(|e| e.in_stage(stage))?;

        if config.save_models {
            let path = config.out_dir.join(format!("model_{}.json", kind.token()));
            fs::write(&path, model.to_json()).map_err(|e| Error::from(e).in_stage(stage))?;
        }

        clock.lap(&format!("model:{}", kind.token()));
        model_reports.push(ModelReport {
            kind,
            train_accuracy,
            test_accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            auc: model_auc,
            cv,
            confusion: cm,
            roc,
        });
    }

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        data_sha256,
        n_rows: labeled_rows.len(),
        n_encoded_features: column_scores.len(),
        n_selected_features: kept_names.len(),
        class_counts: {
            let pos = labels.iter().filter(|&&l| l == 1).count();
            (labels.len() - pos, pos)
        },
        dropped_columns: encoder.dropped.clone(),
        timings: clock.timings,
    };

    let report = BenchReport {
        models: model_reports,
        feature_scores,
        column_scores,
        manifest,
    };

    emit_artifacts(&report, &config.out_dir).map_err(|e| e.in_stage("emit"))?;
    Ok(report)
}

/// Row indices with a present target cell, and their labels.
fn labeled_rows(table: &RawTable, config: &TableConfig) -> Result<(Vec<usize>, Vec<u8>)> {
    let target = fit_target_map(table, config)?;
    let target_idx = table
        .column_index(&config.target)
        .ok_or_else(|| Error::Schema(format!("target column `{}` not found", config.target)))?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for r in 0..table.n_rows() {
        match table.cell(r, target_idx) {
            None => continue,
            Some(v) => {
                rows.push(r);
                labels.push(u8::from(v == target.positive));
            }
        }
    }
    Ok((rows, labels))
}

fn to_table_rows(labeled: &[usize], positions: &[usize]) -> Vec<usize> {
    positions.iter().map(|&p| labeled[p]).collect()
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Two Gaussian clusters with unit within-class variance, centered at
/// `±separation/2` along a seeded random unit direction.
pub fn generate_synthetic(
    n: usize,
    d: usize,
    class1_fraction: f64,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || d == 0 {
        return Err(Error::Param("n and d must be at least 1".into()));
    }
    if !(class1_fraction > 0.0 && class1_fraction < 1.0) {
        return Err(Error::Param(format!(
            "class1_fraction must be in (0, 1), got {class1_fraction}"
        )));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::Param(format!(
            "separation must be a nonnegative real, got {separation}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Random unit direction.
    let mut direction: Vec<f64> = (0..d).map(|_| standard_normal(&mut rng)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in direction.iter_mut() {
            *v /= norm;
        }
    } else {
        direction[0] = 1.0;
    }

    let n_pos = ((n as f64) * class1_fraction).round() as usize;
    let mut labels: Vec<u8> = (0..n).map(|i| u8::from(i < n_pos)).collect();
    labels.shuffle(&mut rng);

    let half = separation / 2.0;
    let mut rows = Vec::with_capacity(n);
    for &label in &labels {
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let row: Vec<f64> = direction
            .iter()
            .map(|u| sign * half * u + standard_normal(&mut rng))
            .collect();
        rows.push(row);
    }

    let meta = (0..d)
        .map(|c| FeatureMeta {
            name: format!("f{c}"),
            source: format!("f{c}"),
            kind: FeatureKind::Numeric,
            categories: Vec::new(),
            impute: ImputeValue::Number(0.0),
            scale: None,
        })
        .collect();
    let ids = (0..n).map(|i| i.to_string()).collect();
    Dataset::new(Matrix::from_rows(rows)?, labels, meta, ids)
}

/// Box-Muller standard normal draw.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let mut u1: f64 = rng.random();
    while u1 <= f64::MIN_POSITIVE {
        u1 = rng.random();
    }
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Write a dataset as CSV with a trailing `label` column, suitable for
/// `bench run --target label`. Floats print in shortest round-trip form, so
/// reloading reproduces the exact values.
pub fn write_synthetic_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for m in &data.meta {
        out.push_str(&m.name);
        out.push(',');
    }
    out.push_str("label\n");
    for r in 0..data.n_samples() {
        for v in data.features.row(r) {
            out.push_str(&format!("{v},"));
        }
        out.push_str(&format!("{}\n", data.labels[r]));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// Write every artifact for `report` into `out_dir`, returning the created
/// paths. On failure the partially written files are removed.
pub fn emit_artifacts(report: &BenchReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    prepare_out_dir(out_dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    match emit_all(report, out_dir, &mut written) {
        Ok(()) => Ok(written),
        Err(e) => {
            for path in &written {
                let _ = fs::remove_file(path);
            }
            Err(e)
        }
    }
}

fn emit_all(report: &BenchReport, out_dir: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    // report.csv: the headline table.
    let mut w = new_csv(out_dir, "report.csv", written)?;
    w.write_record([
        "model",
        "train_accuracy",
        "test_accuracy",
        "precision",
        "recall",
        "auc",
    ])
    .map_err(csv_io)?;
    for m in &report.models {
        w.write_record([
            m.kind.token().to_string(),
            format!("{}", m.train_accuracy),
            format!("{}", m.test_accuracy),
            format!("{}", m.precision),
            format!("{}", m.recall),
            format!("{}", m.auc),
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;

    // cv_folds.csv: per-fold accuracies for box plots.
    let mut w = new_csv(out_dir, "cv_folds.csv", written)?;
    w.write_record(["model", "fold", "accuracy"]).map_err(csv_io)?;
    for m in &report.models {
        for (fold, acc) in m.cv.fold_accuracies.iter().enumerate() {
            w.write_record([
                m.kind.token().to_string(),
                fold.to_string(),
                format!("{acc}"),
            ])
            .map_err(csv_io)?;
        }
    }
    w.flush()?;

    // Per-model ROC curves and confusion matrices.
    for m in &report.models {
        let mut w = new_csv(out_dir, &format!("roc_{}.csv", m.kind.token()), written)?;
        w.write_record(["threshold", "fpr", "tpr"]).map_err(csv_io)?;
        for (threshold, (fpr, tpr)) in m.roc.thresholds.iter().zip(&m.roc.points) {
            w.write_record([
                format!("{threshold}"),
                format!("{fpr}"),
                format!("{tpr}"),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;

        let mut w = new_csv(
            out_dir,
            &format!("confusion_{}.csv", m.kind.token()),
            written,
        )?;
        w.write_record(["tp", "fp", "tn", "fn"]).map_err(csv_io)?;
        w.write_record([
            m.confusion.tp.to_string(),
            m.confusion.fp.to_string(),
            m.confusion.tn.to_string(),
            m.confusion.fnc.to_string(),
        ])
        .map_err(csv_io)?;
        w.flush()?;
    }

    // feature_scores.csv: per-variable ranking, best first.
    let mut w = new_csv(out_dir, "feature_scores.csv", written)?;
    w.write_record(["feature", "score", "rank"]).map_err(csv_io)?;
    let mut by_rank: Vec<&FeatureScore> = report.feature_scores.iter().collect();
    by_rank.sort_by_key(|f| f.rank);
    for f in by_rank {
        w.write_record([f.feature_name.clone(), format!("{}", f.score), f.rank.to_string()])
            .map_err(csv_io)?;
    }
    w.flush()?;

    let manifest_path = out_dir.join("manifest.json");
    written.push(manifest_path.clone());
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&report.manifest).expect("manifest serialization"),
    )?;

    Ok(())
}

fn new_csv(
    out_dir: &Path,
    name: &str,
    written: &mut Vec<PathBuf>,
) -> Result<csv::Writer<fs::File>> {
    let path = out_dir.join(name);
    written.push(path.clone());
    let file = fs::File::create(&path)?;
    Ok(csv::WriterBuilder::new().from_writer(file))
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
