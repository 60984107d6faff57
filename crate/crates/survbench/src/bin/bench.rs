//! `bench` — train and compare the seven classifiers on a clinical CSV, or
//! generate a synthetic cohort to exercise the pipeline.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use survbench::bench::{generate_synthetic, run_benchmark, write_synthetic_csv, RunConfig};
use survbench::learners::{HyperValue, LearnerKind};
use survbench::Error;

#[derive(Parser)]
#[command(name = "bench", version, about = "Benchmark seven classifiers on clinical survival CSVs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full benchmark on a CSV file.
    Run(RunArgs),
    /// Generate a synthetic two-cluster cohort CSV.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Input CSV path (UTF-8, header row required).
    #[arg(long)]
    data: PathBuf,

    /// Name of the binary target column.
    #[arg(long)]
    target: String,

    /// Raw target value mapped to label 1 (default: the lexicographically
    /// larger observed value).
    #[arg(long)]
    positive: Option<String>,

    /// Column holding sample identifiers, excluded from the features.
    #[arg(long)]
    id_column: Option<String>,

    /// Columns to exclude from the feature set (comma-separated).
    #[arg(long, value_delimiter = ',')]
    drop: Vec<String>,

    /// Fraction of rows held out for testing.
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,

    /// Number of cross-validation folds.
    #[arg(long, default_value_t = 10)]
    k_folds: usize,

    /// Keep only the k best-scoring encoded columns ("all" keeps every
    /// column).
    #[arg(long, default_value = "all")]
    select_k: String,

    /// Models to run (comma-separated tokens: lr,svm,dt,rf,et,knn,ada).
    #[arg(long, value_delimiter = ',', default_value = "lr,svm,dt,rf,et,knn,ada")]
    models: Vec<String>,

    /// Master seed for the split, fold assignment and seeded learners.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output directory for report.csv and the other artifacts.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,

    /// Hyperparameter override, repeatable: <model>.<name>=<value>,
    /// e.g. --hyper rf.n_trees=200 --hyper knn.metric=manhattan
    #[arg(long = "hyper")]
    hyper: Vec<String>,

    /// Use plain (unstratified) splits and folds.
    #[arg(long)]
    no_stratify: bool,

    /// Also write each trained model as model_<token>.json.
    #[arg(long)]
    save_models: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of samples.
    #[arg(long)]
    n: usize,

    /// Number of features.
    #[arg(long)]
    d: usize,

    /// Fraction of positive (label 1) samples.
    #[arg(long, default_value_t = 0.579)]
    balance: f64,

    /// Distance between the class means, in within-class stddev units.
    #[arg(long, default_value_t = 2.0)]
    sep: f64,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

fn parse_models(tokens: &[String]) -> Result<Vec<LearnerKind>, Error> {
    let mut models = Vec::new();
    for token in tokens {
        let kind = LearnerKind::from_token(token).ok_or_else(|| {
            Error::Param(format!(
                "unknown model token `{token}` (expected one of: lr, svm, dt, rf, et, knn, ada)"
            ))
        })?;
        if !models.contains(&kind) {
            models.push(kind);
        }
    }
    Ok(models)
}

/// Parse one `<model>.<name>=<value>` override.
fn parse_hyper(raw: &str) -> Result<(String, String, HyperValue), Error> {
    let bad = || {
        Error::Param(format!(
            "expected <model>.<name>=<value>, got `{raw}`"
        ))
    };
    let (key, value) = raw.split_once('=').ok_or_else(bad)?;
    let (model, name) = key.split_once('.').ok_or_else(bad)?;
    if model.is_empty() || name.is_empty() || value.is_empty() {
        return Err(bad());
    }
    if LearnerKind::from_token(model).is_none() {
        return Err(Error::Param(format!("unknown model token `{model}` in `{raw}`")));
    }
    let value = match value.parse::<f64>() {
        Ok(number) => HyperValue::Number(number),
        Err(_) => HyperValue::Text(value.to_string()),
    };
    Ok((model.to_string(), name.to_string(), value))
}

fn build_config(args: RunArgs) -> Result<RunConfig, Error> {
    let mut config = RunConfig::new(args.data, args.target, args.out);
    config.positive_value = args.positive;
    config.id_column = args.id_column;
    config.drop_columns = args.drop;
    config.test_fraction = args.test_fraction;
    config.k_folds = args.k_folds;
    config.select_k = match args.select_k.as_str() {
        "all" => None,
        other => Some(other.parse::<usize>().map_err(|_| {
            Error::Param(format!("--select-k expects a positive integer or `all`, got `{other}`"))
        })?),
    };
    config.models = parse_models(&args.models)?;
    config.seed = args.seed;
    config.stratify = !args.no_stratify;
    config.save_models = args.save_models;

    let mut overrides: BTreeMap<String, BTreeMap<String, HyperValue>> = BTreeMap::new();
    for raw in &args.hyper {
        let (model, name, value) = parse_hyper(raw)?;
        overrides.entry(model).or_default().insert(name, value);
    }
    config.overrides = overrides;
    Ok(config)
}

fn run(args: RunArgs) -> Result<(), Error> {
    let config = build_config(args)?;
    let report = run_benchmark(&config)?;

    println!(
        "{:<6} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "model", "train_acc", "test_acc", "precision", "recall", "auc"
    );
    for m in &report.models {
        println!(
            "{:<6} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            m.kind.token(),
            m.train_accuracy,
            m.test_accuracy,
            m.precision,
            m.recall,
            m.auc
        );
    }
    println!(
        "artifacts written to {}",
        report.manifest.config.out_dir.display()
    );
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Error> {
    let data = generate_synthetic(args.n, args.d, args.balance, args.sep, args.seed)?;
    write_synthetic_csv(&data, &args.out)?;
    let (neg, pos) = data.class_counts();
    println!(
        "wrote {} samples ({pos} positive, {neg} negative, {} features) to {}",
        data.n_samples(),
        data.n_features(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Synth(args) => synth(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
