//! Supervised classification library and benchmark harness for binary
//! survival prediction on clinical tabular data.
//!
//! The crate covers the full pipeline: CSV ingestion with imputation and
//! one-hot encoding ([`data`]), univariate ANOVA-F feature selection
//! ([`select`]), seven from-scratch classifiers behind one train / predict
//! / score contract ([`learners`]), stratified cross-validation with a
//! threshold and ranking metric suite ([`eval`]), and a benchmark driver
//! that writes a comparison report plus plot-ready artifacts ([`bench`]).
//!
//! ```no_run
//! use survbench::bench::{run_benchmark, RunConfig};
//!
//! let config = RunConfig::new("cohort.csv", "overall_survival", "out");
//! let report = run_benchmark(&config)?;
//! for model in &report.models {
//!     println!("{}: {:.4}", model.kind.token(), model.test_accuracy);
//! }
//! # Ok::<(), survbench::Error>(())
//! ```

pub mod bench;
pub mod data;
pub mod error;
pub mod eval;
pub mod learners;
pub mod matrix;
pub mod select;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use matrix::Matrix;
