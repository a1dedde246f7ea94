//! Batch command-line front end: ingestion, training, evaluation,
//! clustering, and decomposition, emitting JSON/CSV artifacts suitable
//! for external plotting.
//!
//! Every run writes one manifest alongside its outputs; `tabula rerun
//! --manifest <file>` replays the recorded argv (seed included) and
//! reproduces the output files byte for byte. Exit codes: 0 success,
//! 2 usage error, 3 data error, 4 numeric failure.

mod commands;
mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use common::{to_sorted_json, write_atomic, CliError, RunManifest};

#[derive(Parser)]
#[command(name = "tabula", version, about = "Classical machine-learning toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hold-out split of a CSV dataset into train and test files
    Split(SplitArgs),
    /// Fit and/or apply per-column feature scaling
    Scale(ScaleArgs),
    /// Train a model and write it as JSON
    Train(TrainArgs),
    /// Predict labels (or numbers) for a CSV with a stored model
    Predict(PredictArgs),
    /// Score a stored model on labeled data
    Evaluate(EvaluateArgs),
    /// k-fold cross-validation of an estimator spec
    Cv(CvArgs),
    /// Grid or random hyperparameter search
    Gridsearch(GridSearchArgs),
    /// Clustering: kmeans, gmm, dbscan, agglo, diana
    Cluster(ClusterArgs),
    /// Principal component scores and model
    Pca(PcaArgs),
    /// Hold-out KNN error rate for every k in a range
    KnnErrorCurve(KnnCurveArgs),
    /// Re-execute a command from its run manifest
    Rerun(RerunArgs),
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub test_fraction: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub stratified: bool,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
}

#[derive(Args)]
pub struct ScaleArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: Option<String>,
    /// standardize | min-max (fit mode; omit when using --params)
    #[arg(long)]
    pub kind: Option<String>,
    /// previously fitted scaler parameters to apply
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// where to store fitted scaler parameters
    #[arg(long)]
    pub params_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct TrainArgs {
    /// estimator spec, e.g. knn:k=5 or bagging:base=tree,T=25
    #[arg(long)]
    pub algo: String,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// held-out data for reduced-error post-pruning (trees only)
    #[arg(long)]
    pub validation_data: Option<PathBuf>,
    #[arg(long)]
    pub post_prune: bool,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// label column to drop from the features, when present
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CvArgs {
    #[arg(long)]
    pub algo: String,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub folds: usize,
    #[arg(long)]
    pub stratified: bool,
    #[arg(long, default_value = "accuracy")]
    pub metric: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct GridSearchArgs {
    /// base estimator spec the parameters extend, e.g. `knn`
    #[arg(long)]
    pub algo: String,
    /// repeatable: NAME=1..29, NAME=0.1..2:5, or NAME=a|b|c
    #[arg(long)]
    pub param: Vec<String>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub folds: usize,
    #[arg(long)]
    pub stratified: bool,
    #[arg(long, default_value = "accuracy")]
    pub metric: String,
    #[arg(long, default_value = "grid")]
    pub mode: String,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ClusterArgs {
    /// kmeans:k=2 | gmm:k=3 | dbscan:eps=0.11,min_pts=5 |
    /// agglo:linkage=complete | diana
    #[arg(long)]
    pub algo: String,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// first-k | random (kmeans)
    #[arg(long, default_value = "first-k")]
    pub init: String,
    /// explicit kmeans starting centers, e.g. "2,1;2,3"
    #[arg(long)]
    pub init_centers: Option<String>,
    #[arg(long, default_value = "euclidean")]
    pub metric: String,
    /// assignments CSV (kmeans/gmm/dbscan) or dendrogram JSON
    /// (agglo/diana)
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub newick_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PcaArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub components: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub model_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct KnnCurveArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub label: String,
    #[arg(long)]
    pub k_min: usize,
    #[arg(long)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.25)]
    pub test_fraction: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub stratified: bool,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value = "euclidean")]
    pub metric: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

fn main() -> ExitCode {
    configure_threads();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match execute(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Cap the worker pool from TABULA_THREADS when set.
fn configure_threads() {
    if let Ok(value) = std::env::var("TABULA_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn execute(argv: Vec<String>) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(std::iter::once("tabula".to_string()).chain(argv.clone()))
    {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print and succeed; anything else is usage
            let _ = e.print();
            if e.use_stderr() {
                std::process::exit(2);
            }
            std::process::exit(0);
        }
    };

    if let Command::Rerun(args) = &cli.command {
        let manifest = RunManifest::load(&args.manifest)?;
        if manifest.command == "rerun" {
            return Err(CliError::usage("manifest records a rerun; nothing to replay"));
        }
        return execute(manifest.argv);
    }

    let start = Instant::now();
    let outcome = run_command(&cli.command)?;
    let wall_time_ms = start.elapsed().as_millis() as u64;
    let command_name = command_name(&cli.command);

    // resolve the seed into the recorded argv so a replay is identical
    let mut recorded_argv = argv;
    if let Some(seed) = outcome.seed {
        if !recorded_argv.iter().any(|a| a == "--seed") {
            recorded_argv.push("--seed".to_string());
            recorded_argv.push(seed.to_string());
        }
    }

    if let Some(primary) = outcome.outputs.first() {
        let manifest = RunManifest {
            command: command_name.to_string(),
            argv: recorded_argv,
            seed: outcome.seed,
            inputs: outcome.inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: outcome.outputs.iter().map(|p| p.display().to_string()).collect(),
            wall_time_ms,
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        write_atomic(&RunManifest::path_for(primary), &to_sorted_json(&manifest)?)?;
    }

    let mut line = json!({
        "command": command_name,
        "outputs": outcome.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "wall_time_ms": wall_time_ms,
    });
    if let Some(seed) = outcome.seed {
        line["seed"] = json!(seed);
    }
    if let serde_json::Value::Object(extra) = outcome.summary {
        for (k, v) in extra {
            line[k] = v;
        }
    }
    let sorted: serde_json::Value =
        serde_json::from_str(&to_sorted_json(&line)?).map_err(|e| CliError::Data(e.to_string()))?;
    println!("{}", serde_json::to_string(&sorted).map_err(|e| CliError::Data(e.to_string()))?);
    Ok(())
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Split(_) => "split",
        Command::Scale(_) => "scale",
        Command::Train(_) => "train",
        Command::Predict(_) => "predict",
        Command::Evaluate(_) => "evaluate",
        Command::Cv(_) => "cv",
        Command::Gridsearch(_) => "gridsearch",
        Command::Cluster(_) => "cluster",
        Command::Pca(_) => "pca",
        Command::KnnErrorCurve(_) => "knn-error-curve",
        Command::Rerun(_) => "rerun",
    }
}

fn run_command(command: &Command) -> Result<commands::RunOutcome, CliError> {
    match command {
        Command::Split(args) => commands::split(args),
        Command::Scale(args) => commands::scale(args),
        Command::Train(args) => commands::train(args),
        Command::Predict(args) => commands::predict(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Cv(args) => commands::cv(args),
        Command::Gridsearch(args) => commands::gridsearch(args),
        Command::Cluster(args) => commands::cluster(args),
        Command::Pca(args) => commands::pca(args),
        Command::KnnErrorCurve(args) => commands::knn_error_curve(args),
        Command::Rerun(_) => unreachable!("rerun is replayed in execute"),
    }
}
