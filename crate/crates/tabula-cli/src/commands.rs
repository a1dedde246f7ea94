//! Subcommand bodies. Each returns a [`RunOutcome`] with the files it
//! wrote and a one-line JSON summary for stdout; the manifest and exit
//! handling live in `main`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use tabula::clustering::{
    agglomerative, dbscan, diana, gmm_em, kmeans, GmmInit, KMeansInit, Linkage,
};
use tabula::data::{
    apply_scaler, fit_scaler, train_test_split, Dataset, ScalerKind, ScalerParams,
};
use tabula::distance::DistanceMetric;
use tabula::evaluation::{
    confusion, cross_validate, grid_search, k_fold, random_search, ParamAxis, ScoreMetric,
    SearchMode, SearchSpace,
};
use tabula::model::{EstimatorSpec, FittedModel};
use tabula::pca::{explained_variance_ratio, pca_fit, pca_transform};
use tabula::supervised::knn::{knn_fit, knn_predict};
use tabula::supervised::tree::tree_fit;

use crate::common::{to_sorted_json, write_atomic, CliError};
use crate::{
    ClusterArgs, CvArgs, EvaluateArgs, GridSearchArgs, KnnCurveArgs, PcaArgs, PredictArgs,
    ScaleArgs, SplitArgs, TrainArgs,
};

pub struct RunOutcome {
    pub summary: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
}

fn load(path: &Path, label: Option<&str>) -> Result<Dataset, CliError> {
    Dataset::load_csv(path, label).map_err(CliError::from)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

pub fn split(args: &SplitArgs) -> Result<RunOutcome, CliError> {
    let d = load(&args.data, args.label.as_deref())?;
    let seed = resolve_seed(args.seed);
    let (train, test) = train_test_split(&d, args.test_fraction, seed, args.stratified)?;
    write_atomic(&args.train_out, &train.to_csv_string())?;
    write_atomic(&args.test_out, &test.to_csv_string())?;
    Ok(RunOutcome {
        summary: json!({ "train_rows": train.n_rows(), "test_rows": test.n_rows() }),
        inputs: vec![args.data.clone()],
        outputs: vec![args.train_out.clone(), args.test_out.clone()],
        seed: Some(seed),
    })
}

pub fn scale(args: &ScaleArgs) -> Result<RunOutcome, CliError> {
    let d = load(&args.data, args.label.as_deref())?;
    let mut inputs = vec![args.data.clone()];
    let mut outputs = Vec::new();

    let params: ScalerParams = match &args.params {
        Some(path) => {
            inputs.push(path.clone());
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Data(format!("scaler params: {e}")))?
        }
        None => {
            let kind = match args.kind.as_deref() {
                Some("standardize") | None => ScalerKind::Standardize,
                Some("min-max") => ScalerKind::MinMax,
                Some(other) => {
                    return Err(CliError::usage(format!("unknown --kind {other:?}")));
                }
            };
            fit_scaler(&d, kind)?
        }
    };
    let scaled = apply_scaler(&d, &params)?;
    write_atomic(&args.out, &scaled.to_csv_string())?;
    outputs.push(args.out.clone());
    if let Some(path) = &args.params_out {
        write_atomic(path, &to_sorted_json(&params)?)?;
        outputs.push(path.clone());
    }
    Ok(RunOutcome {
        summary: json!({ "rows": scaled.n_rows(), "columns": params.columns.len() }),
        inputs,
        outputs,
        seed: None,
    })
}

pub fn train(args: &TrainArgs) -> Result<RunOutcome, CliError> {
    let d = load(&args.data, Some(&args.label))?;
    let seed = resolve_seed(args.seed);
    let mut inputs = vec![args.data.clone()];

    // post-pruned trees take a dedicated path: they need the held-out
    // validation set at fit time
    let model = match (&args.validation_data, args.post_prune) {
        (Some(validation_path), true) => {
            let spec = EstimatorSpec::parse(&args.algo)?;
            let EstimatorSpec::Tree { config } = spec else {
                return Err(CliError::usage("--post-prune requires --algo tree:..."));
            };
            inputs.push(validation_path.clone());
            let validation = load(validation_path, Some(&args.label))?;
            FittedModel::Tree(tree_fit(&d, &config, true, Some(&validation))?)
        }
        (None, true) => {
            return Err(CliError::usage("--post-prune requires --validation-data"));
        }
        _ => EstimatorSpec::parse(&args.algo)?.fit(&d, seed)?,
    };

    write_atomic(&args.out, &model.to_json_string().map_err(CliError::from)?)?;
    Ok(RunOutcome {
        summary: json!({ "algo": args.algo, "rows": d.n_rows() }),
        inputs,
        outputs: vec![args.out.clone()],
        seed: Some(seed),
    })
}

fn load_model(path: &Path) -> Result<FittedModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    FittedModel::from_json_str(&text).map_err(CliError::from)
}

pub fn predict(args: &PredictArgs) -> Result<RunOutcome, CliError> {
    let model = load_model(&args.model)?;
    let d = load(&args.data, args.label.as_deref())?;
    let mut csv = String::from("row_id,prediction\n");
    match model.predict_labels(&d) {
        Ok(labels) => {
            for (i, label) in labels.iter().enumerate() {
                let _ = writeln!(csv, "{i},{label}");
            }
        }
        Err(_) => {
            let numbers = model.predict_numbers(&d).map_err(CliError::from)?;
            for (i, value) in numbers.iter().enumerate() {
                let _ = writeln!(csv, "{i},{value}");
            }
        }
    }
    write_atomic(&args.out, &csv)?;
    Ok(RunOutcome {
        summary: json!({ "rows": d.n_rows() }),
        inputs: vec![args.model.clone(), args.data.clone()],
        outputs: vec![args.out.clone()],
        seed: None,
    })
}

pub fn evaluate(args: &EvaluateArgs) -> Result<RunOutcome, CliError> {
    let model = load_model(&args.model)?;
    let d = load(&args.data, Some(&args.label))?;
    let truth = d.label_strings()?;
    let predictions = model.predict_labels(&d).map_err(CliError::from)?;
    let cm = confusion(&truth, &predictions)?;
    let report = cm.report();
    write_atomic(&args.out, &to_sorted_json(&report)?)?;
    Ok(RunOutcome {
        summary: json!({ "accuracy": report.accuracy, "rows": d.n_rows() }),
        inputs: vec![args.model.clone(), args.data.clone()],
        outputs: vec![args.out.clone()],
        seed: None,
    })
}

fn parse_metric(spec: &str) -> Result<ScoreMetric, CliError> {
    ScoreMetric::parse(spec)
        .ok_or_else(|| CliError::usage(format!("unknown --metric {spec:?}")))
}

pub fn cv(args: &CvArgs) -> Result<RunOutcome, CliError> {
    let d = load(&args.data, Some(&args.label))?;
    let seed = resolve_seed(args.seed);
    let spec = EstimatorSpec::parse(&args.algo)?;
    let metric = parse_metric(&args.metric)?;
    let plan = k_fold(&d, args.folds, args.stratified, seed)?;
    let result = cross_validate(&d, &plan, &spec, &metric)?;
    let payload = json!({
        "algo": args.algo,
        "metric": args.metric,
        "k": args.folds,
        "stratified": args.stratified,
        "fold_scores": result.fold_scores,
        "mean": result.mean,
    });
    write_atomic(&args.out, &to_sorted_json(&payload)?)?;
    Ok(RunOutcome {
        summary: json!({ "mean": result.mean, "metric": args.metric }),
        inputs: vec![args.data.clone()],
        outputs: vec![args.out.clone()],
        seed: Some(seed),
    })
}

/// `--param k=1..29`, `--param sigma=0.1..2:5` (5 linspaced reals), or
/// `--param kernel=linear|rbf:sigma=1`.
fn parse_param_axis(spec: &str) -> Result<ParamAxis, CliError> {
    let (name, rest) = spec
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("--param expects NAME=VALUES, got {spec:?}")))?;
    if let Some((range, count)) = rest.rsplit_once(':').and_then(|(r, c)| {
        let count: usize = c.parse().ok()?;
        Some((r, count))
    }) {
        if let Some((lo, hi)) = parse_range(range) {
            if count == 0 {
                return Err(CliError::usage("range sample count must be at least 1"));
            }
            return Ok(ParamAxis::linspace(name, lo, hi, count));
        }
    }
    if let Some((lo, hi)) = parse_range(rest) {
        if lo.fract() == 0.0 && hi.fract() == 0.0 && lo <= hi {
            return Ok(ParamAxis::int_range(name, lo as i64, hi as i64));
        }
    }
    let values: Vec<&str> = rest.split('|').collect();
    Ok(ParamAxis::list(name, &values))
}

fn parse_range(text: &str) -> Option<(f64, f64)> {
    let (lo, hi) = text.split_once("..")?;
    Some((lo.parse().ok()?, hi.parse().ok()?))
}

pub fn gridsearch(args: &GridSearchArgs) -> Result<RunOutcome, CliError> {
    let d = load(&args.data, Some(&args.label))?;
    let seed = resolve_seed(args.seed);
    let metric = parse_metric(&args.metric)?;
    let axes = args
        .param
        .iter()
        .map(|p| parse_param_axis(p))
        .collect::<Result<Vec<_>, _>>()?;
    let plan = k_fold(&d, args.folds, args.stratified, seed)?;

    let outcome = match args.mode.as_str() {
        "grid" => {
            let space = SearchSpace { axes, mode: SearchMode::Grid };
            grid_search(&d, &space, &args.algo, &plan, &metric)?
        }
        "random" => {
            let samples = args
                .samples
                .ok_or_else(|| CliError::usage("--mode random requires --samples"))?;
            let space = SearchSpace {
                axes,
                mode: SearchMode::Random { samples, seed: seed.wrapping_add(1) },
            };
            random_search(&d, &space, &args.algo, &plan, &metric)?
        }
        other => return Err(CliError::usage(format!("unknown --mode {other:?}"))),
    };
    let payload = json!({
        "metric": args.metric,
        "mode": args.mode,
        "best": outcome.best,
        "table": outcome.table,
    });
    write_atomic(&args.out, &to_sorted_json(&payload)?)?;
    Ok(RunOutcome {
        summary: json!({ "best_spec": outcome.best.spec, "best_score": outcome.best.mean_score }),
        inputs: vec![args.data.clone()],
        outputs: vec![args.out.clone()],
        seed: Some(seed),
    })
}

/// `"2,1;2,3"` → two 2-D starting centers.
fn parse_centers(text: &str) -> Result<Vec<Vec<f64>>, CliError> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::usage(format!("bad center coordinate {v:?}")))
                })
                .collect()
        })
        .collect()
}

fn assignments_csv(labels: &[Option<usize>]) -> String {
    let mut csv = String::from("row_id,cluster\n");
    for (i, label) in labels.iter().enumerate() {
        match label {
            Some(c) => {
                let _ = writeln!(csv, "{i},{c}");
            }
            None => {
                let _ = writeln!(csv, "{i},NOISE");
            }
        }
    }
    csv
}

struct KvSpec<'a> {
    name: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

fn parse_kv_spec(spec: &str) -> Result<KvSpec<'_>, CliError> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n, r),
        None => (spec, ""),
    };
    let mut pairs = Vec::new();
    if !rest.is_empty() {
        for kv in rest.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                CliError::usage(format!("expected key=value in {spec:?}, got {kv:?}"))
            })?;
            pairs.push((k, v));
        }
    }
    Ok(KvSpec { name, pairs })
}

impl KvSpec<'_> {
    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.pairs.iter().find(|(k, _)| *k == key) {
            None => Ok(default),
            Some((_, v)) => v
                .parse()
                .map_err(|_| CliError::usage(format!("invalid value for {key}"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| CliError::usage(format!("missing parameter {key}")))?
            .1
            .parse()
            .map_err(|_| CliError::usage(format!("invalid value for {key}")))
    }
}

pub fn cluster(args: &ClusterArgs) -> Result<RunOutcome, CliError> {
    let d = load(&args.data, args.label.as_deref())?;
    let seed = resolve_seed(args.seed);
    let spec = parse_kv_spec(&args.algo)?;
    let metric = DistanceMetric::parse(&args.metric).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut outputs = Vec::new();

    let summary = match spec.name {
        "kmeans" => {
            let k: usize = spec.require("k")?;
            let max_iter: usize = spec.get("max_iter", 300)?;
            let tol: f64 = spec.get("tol", 1e-9)?;
            let (model, assignment) = match &args.init_centers {
                Some(text) => {
                    let centers = parse_centers(text)?;
                    if centers.len() != k {
                        return Err(CliError::usage(format!(
                            "--init-centers supplies {} centers, k = {k}",
                            centers.len()
                        )));
                    }
                    tabula::clustering::kmeans_with_centers(&d, centers, max_iter, tol)?
                }
                None => {
                    let init = match args.init.as_str() {
                        "first-k" => KMeansInit::FirstK,
                        "random" => KMeansInit::SeededRandom,
                        other => {
                            return Err(CliError::usage(format!("unknown --init {other:?}")));
                        }
                    };
                    kmeans(&d, k, init, seed, max_iter, tol)?
                }
            };
            write_atomic(&args.out, &assignments_csv(&assignment.labels))?;
            outputs.push(args.out.clone());
            json!({
                "algo": "kmeans", "k": k,
                "objective": model.objective,
                "iterations": model.iterations,
            })
        }
        "gmm" => {
            let k: usize = spec.require("k")?;
            let max_iter: usize = spec.get("max_iter", 200)?;
            let tol: f64 = spec.get("tol", 1e-7)?;
            let ridge: f64 = spec.get("ridge", tabula::clustering::DEFAULT_RIDGE)?;
            let (model, assignment) =
                gmm_em(&d, k, GmmInit::SeededRows, seed, max_iter, tol, ridge)?;
            write_atomic(&args.out, &assignments_csv(&assignment.labels))?;
            outputs.push(args.out.clone());
            json!({
                "algo": "gmm", "k": k,
                "iterations": model.iterations,
                "log_likelihood": model.log_likelihood.last(),
                "mixing": model.mixing,
            })
        }
        "dbscan" => {
            let eps: f64 = spec.require("eps")?;
            let min_pts: usize = spec.require("min_pts")?;
            let (assignment, roles) = dbscan(&d, eps, min_pts, &metric)?;
            write_atomic(&args.out, &assignments_csv(&assignment.labels))?;
            outputs.push(args.out.clone());
            let cores = roles
                .iter()
                .filter(|r| **r == tabula::clustering::PointRole::Core)
                .count();
            json!({
                "algo": "dbscan", "clusters": assignment.k,
                "core_points": cores,
                "noise_points": assignment.noise_rows().len(),
            })
        }
        "agglo" | "diana" => {
            let rows = d.to_matrix().map_err(CliError::from)?;
            let n = rows.len();
            let mut dist = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = metric
                        .eval(&rows[i], &rows[j])
                        .map_err(|e| CliError::Data(e.to_string()))?;
                    dist[i][j] = v;
                    dist[j][i] = v;
                }
            }
            let dendrogram = if spec.name == "agglo" {
                let linkage = Linkage::parse(&spec.get("linkage", "complete".to_string())?)
                    .ok_or_else(|| CliError::usage("linkage must be single|complete|average"))?;
                agglomerative(&dist, linkage)?
            } else {
                diana(&dist)?.0
            };
            write_atomic(
                &args.out,
                &to_sorted_json(&dendrogram.to_json_value())?,
            )?;
            outputs.push(args.out.clone());
            if let Some(path) = &args.newick_out {
                write_atomic(path, &dendrogram.to_newick())?;
                outputs.push(path.clone());
            }
            json!({ "algo": spec.name, "merges": dendrogram.steps.len() })
        }
        other => return Err(CliError::usage(format!("unknown clustering algo {other:?}"))),
    };

    Ok(RunOutcome {
        summary,
        inputs: vec![args.data.clone()],
        outputs,
        seed: Some(seed),
    })
}

pub fn pca(args: &PcaArgs) -> Result<RunOutcome, CliError> {
    let d = load(&args.data, args.label.as_deref())?;
    let model = pca_fit(&d, args.components)?;
    let scores = pca_transform(&model, &d.to_matrix()?).map_err(CliError::from)?;

    let mut csv = String::from("row_id");
    for p in 1..=args.components {
        let _ = write!(csv, ",pc{p}");
    }
    csv.push('\n');
    for (i, score) in scores.iter().enumerate() {
        let _ = write!(csv, "{i}");
        for v in score {
            let _ = write!(csv, ",{v}");
        }
        csv.push('\n');
    }
    write_atomic(&args.out, &csv)?;
    let mut outputs = vec![args.out.clone()];
    if let Some(path) = &args.model_out {
        let wrapped = FittedModel::Pca(model.clone());
        write_atomic(path, &wrapped.to_json_string().map_err(CliError::from)?)?;
        outputs.push(path.clone());
    }
    Ok(RunOutcome {
        summary: json!({
            "components": args.components,
            "explained_variance_ratio": explained_variance_ratio(&model)[..args.components],
        }),
        inputs: vec![args.data.clone()],
        outputs,
        seed: None,
    })
}

pub fn knn_error_curve(args: &KnnCurveArgs) -> Result<RunOutcome, CliError> {
    if args.k_min == 0 || args.k_min > args.k_max {
        return Err(CliError::usage("--k-min must satisfy 1 <= k-min <= k-max"));
    }
    let d = load(&args.data, Some(&args.label))?;
    let seed = resolve_seed(args.seed);
    let (mut train, mut test) =
        train_test_split(&d, args.test_fraction, seed, args.stratified)?;
    if args.standardize {
        let params = fit_scaler(&train, ScalerKind::Standardize)?;
        train = apply_scaler(&train, &params)?;
        test = apply_scaler(&test, &params)?;
    }
    if args.k_max > train.n_rows() {
        return Err(CliError::usage(format!(
            "--k-max {} exceeds the {} training rows",
            args.k_max,
            train.n_rows()
        )));
    }
    let metric = DistanceMetric::parse(&args.metric).map_err(|e| CliError::Usage(e.to_string()))?;
    let truth = test.label_strings()?;
    let queries = test.to_matrix()?;

    let mut csv = String::from("k,mean_error\n");
    for k in args.k_min..=args.k_max {
        let model = knn_fit(&train, k, metric.clone())?;
        let predictions = knn_predict(&model, &queries)?;
        let cm = confusion(&truth, &predictions)?;
        let _ = writeln!(csv, "{k},{}", cm.error_rate());
    }
    write_atomic(&args.out, &csv)?;
    Ok(RunOutcome {
        summary: json!({ "k_min": args.k_min, "k_max": args.k_max }),
        inputs: vec![args.data.clone()],
        outputs: vec![args.out.clone()],
        seed: Some(seed),
    })
}
