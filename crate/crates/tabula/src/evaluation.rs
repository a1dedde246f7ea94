//! Resampling protocols, classification/regression metrics, and
//! hyperparameter search.
//!
//! Metrics with a zero denominator return a tagged undefined value
//! (`None`) rather than silently reporting 0, since zeros would corrupt
//! any average built on top of them.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::model::{EstimatorSpec, ModelError};
use crate::rng;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("label vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no observations")]
    Empty,
    #[error("positive class {0:?} not present")]
    PositiveClassMissing(String),
    #[error("k = {k} folds requested for {n} rows")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be at least 2, got {0}")]
    KTooSmall(usize),
    #[error("class {class:?} has {size} rows, fewer than k = {k}")]
    ClassTooSmall { class: String, size: usize, k: usize },
    #[error("search space is empty")]
    EmptySpace,
    #[error("random search needs a sample count >= 1")]
    NoSamples,
    #[error("metric undefined on a fold (zero denominator)")]
    UndefinedMetric,
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Estimator(#[from] ModelError),
}

/// Per-class counts of true label vs predicted label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: Vec<String>,
    /// counts[true][pred]
    counts: Vec<Vec<usize>>,
}

/// Tally predictions against true labels. The class list is the sorted
/// union of all observed labels.
pub fn confusion(y_true: &[String], y_pred: &[String]) -> Result<ConfusionMatrix, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut classes: Vec<String> = y_true.iter().chain(y_pred).cloned().collect();
    classes.sort();
    classes.dedup();
    let index: BTreeMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let mut counts = vec![vec![0usize; classes.len()]; classes.len()];
    for (t, p) in y_true.iter().zip(y_pred) {
        counts[index[t.as_str()]][index[p.as_str()]] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

impl ConfusionMatrix {
    /// Build directly from binary counts with the positive class listed
    /// first in conventional TP/FN/FP/TN order.
    pub fn from_binary_counts(
        positive: &str,
        negative: &str,
        tp: usize,
        fns: usize,
        fp: usize,
        tn: usize,
    ) -> Self {
        let (classes, counts) = if positive < negative {
            (
                vec![positive.to_string(), negative.to_string()],
                vec![vec![tp, fns], vec![fp, tn]],
            )
        } else {
            (
                vec![negative.to_string(), positive.to_string()],
                vec![vec![tn, fp], vec![fns, tp]],
            )
        };
        ConfusionMatrix { classes, counts }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    fn class_index(&self, class: &str) -> Result<usize, EvalError> {
        self.classes
            .iter()
            .position(|c| c == class)
            .ok_or_else(|| EvalError::PositiveClassMissing(class.to_string()))
    }

    pub fn accuracy(&self) -> f64 {
        let correct: usize = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        correct as f64 / self.total() as f64
    }

    // computed from the integer counts, not as 1 − accuracy, so both
    // ratios are correctly rounded and their sum is exactly 1
    pub fn error_rate(&self) -> f64 {
        let correct: usize = (0..self.classes.len()).map(|i| self.counts[i][i]).sum();
        (self.total() - correct) as f64 / self.total() as f64
    }

    /// TP, FP, FN, TN with `class` taken as positive and everything else
    /// pooled as negative.
    pub fn binary_counts(&self, class: &str) -> Result<(usize, usize, usize, usize), EvalError> {
        let p = self.class_index(class)?;
        let tp = self.counts[p][p];
        let fp: usize = (0..self.classes.len())
            .filter(|&t| t != p)
            .map(|t| self.counts[t][p])
            .sum();
        let fn_: usize = (0..self.classes.len())
            .filter(|&q| q != p)
            .map(|q| self.counts[p][q])
            .sum();
        let tn = self.total() - tp - fp - fn_;
        Ok((tp, fp, fn_, tn))
    }

    /// `TP / (FP + TP)`; `None` when no row was predicted positive.
    pub fn precision(&self, class: &str) -> Result<Option<f64>, EvalError> {
        let (tp, fp, _, _) = self.binary_counts(class)?;
        Ok(ratio(tp, tp + fp))
    }

    /// `TP / (FN + TP)`; `None` when the class has no true rows.
    pub fn recall(&self, class: &str) -> Result<Option<f64>, EvalError> {
        let (tp, _, fn_, _) = self.binary_counts(class)?;
        Ok(ratio(tp, tp + fn_))
    }

    /// Sensitivity is recall under another name.
    pub fn sensitivity(&self, class: &str) -> Result<Option<f64>, EvalError> {
        self.recall(class)
    }

    /// `TN / (TN + FP)`; `None` when there are no true negatives or
    /// false positives.
    pub fn specificity(&self, class: &str) -> Result<Option<f64>, EvalError> {
        let (_, fp, _, tn) = self.binary_counts(class)?;
        Ok(ratio(tn, tn + fp))
    }

    /// Harmonic mean of precision and recall; `None` when either is
    /// undefined or both are zero.
    pub fn f1(&self, class: &str) -> Result<Option<f64>, EvalError> {
        let p = self.precision(class)?;
        let r = self.recall(class)?;
        Ok(match (p, r) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        })
    }

    pub fn support(&self, class: &str) -> Result<usize, EvalError> {
        let i = self.class_index(class)?;
        Ok(self.counts[i].iter().sum())
    }

    /// Per-class rows plus macro and support-weighted averages, in the
    /// layout of the usual printed classification reports. Undefined
    /// entries are excluded from the averages rather than counted as 0.
    pub fn report(&self) -> ClassificationReport {
        let per_class: Vec<ClassReportRow> = self
            .classes
            .iter()
            .map(|c| ClassReportRow {
                label: c.clone(),
                precision: self.precision(c).unwrap(),
                recall: self.recall(c).unwrap(),
                f1: self.f1(c).unwrap(),
                support: self.support(c).unwrap(),
            })
            .collect();
        let macro_avg = AverageRow {
            precision: mean_defined(per_class.iter().map(|r| (r.precision, 1.0))),
            recall: mean_defined(per_class.iter().map(|r| (r.recall, 1.0))),
            f1: mean_defined(per_class.iter().map(|r| (r.f1, 1.0))),
        };
        let weighted_avg = AverageRow {
            precision: mean_defined(per_class.iter().map(|r| (r.precision, r.support as f64))),
            recall: mean_defined(per_class.iter().map(|r| (r.recall, r.support as f64))),
            f1: mean_defined(per_class.iter().map(|r| (r.f1, r.support as f64))),
        };
        ClassificationReport {
            accuracy: self.accuracy(),
            per_class,
            macro_avg,
            weighted_avg,
        }
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

fn mean_defined(items: impl Iterator<Item = (Option<f64>, f64)>) -> Option<f64> {
    let mut sum = 0.0;
    let mut weight = 0.0;
    for (v, w) in items {
        if let Some(v) = v {
            sum += v * w;
            weight += w;
        }
    }
    if weight > 0.0 {
        Some(sum / weight)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReportRow {
    pub label: String,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageRow {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub per_class: Vec<ClassReportRow>,
    pub macro_avg: AverageRow,
    pub weighted_avg: AverageRow,
}

/// Mean squared residual `1/m Σ (ŷᵢ − yᵢ)²`.
pub fn mse(y_true: &[f64], y_pred: &[f64]) -> Result<f64, EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (p - t) * (p - t))
        .sum();
    Ok(sum / y_true.len() as f64)
}

/// Disjoint fold assignment covering every row exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub folds: Vec<Vec<usize>>,
    pub stratified: bool,
    pub seed: u64,
}

/// Split row indices into `k` folds whose sizes differ by at most one.
/// With `stratified`, each class is dealt round-robin across folds (the
/// cursor carries over between classes so overall fold sizes stay
/// balanced too).
pub fn k_fold(d: &Dataset, k: usize, stratified: bool, seed: u64) -> Result<FoldPlan, EvalError> {
    let n = d.n_rows();
    if k < 2 {
        return Err(EvalError::KTooSmall(k));
    }
    if k > n {
        return Err(EvalError::KTooLarge { k, n });
    }
    let mut folds = vec![Vec::new(); k];
    if stratified {
        let labels = d.label_strings()?;
        let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &i in &rng::shuffled_indices(n, seed) {
            by_class.entry(labels[i].as_str()).or_default().push(i);
        }
        for (class, members) in &by_class {
            if members.len() < k {
                return Err(EvalError::ClassTooSmall {
                    class: class.to_string(),
                    size: members.len(),
                    k,
                });
            }
        }
        let mut cursor = 0usize;
        for members in by_class.values() {
            for &row in members {
                folds[cursor % k].push(row);
                cursor += 1;
            }
        }
    } else {
        let shuffled = rng::shuffled_indices(n, seed);
        let base = n / k;
        let extra = n % k;
        let mut start = 0;
        for (f, fold) in folds.iter_mut().enumerate() {
            let size = base + usize::from(f < extra);
            fold.extend_from_slice(&shuffled[start..start + size]);
            start += size;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldPlan { k, folds, stratified, seed })
}

/// What a cross-validation or search run optimizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMetric {
    Accuracy,
    ErrorRate,
    F1 { positive: String },
    Mse,
}

impl ScoreMetric {
    pub fn parse(spec: &str) -> Option<ScoreMetric> {
        match spec {
            "accuracy" => Some(ScoreMetric::Accuracy),
            "error" | "error-rate" => Some(ScoreMetric::ErrorRate),
            "mse" => Some(ScoreMetric::Mse),
            _ => spec
                .strip_prefix("f1:positive=")
                .map(|p| ScoreMetric::F1 { positive: p.to_string() }),
        }
    }

    pub fn higher_is_better(&self) -> bool {
        matches!(self, ScoreMetric::Accuracy | ScoreMetric::F1 { .. })
    }

    /// Score a fitted model on a labeled test set.
    pub fn score(
        &self,
        model: &crate::model::FittedModel,
        test: &Dataset,
    ) -> Result<f64, EvalError> {
        match self {
            ScoreMetric::Mse => {
                let truth = test.label_numbers()?;
                let pred = model.predict_numbers(test)?;
                mse(&truth, &pred)
            }
            _ => {
                let truth = test.label_strings()?;
                let pred = model.predict_labels(test)?;
                let cm = confusion(&truth, &pred)?;
                match self {
                    ScoreMetric::Accuracy => Ok(cm.accuracy()),
                    ScoreMetric::ErrorRate => Ok(cm.error_rate()),
                    ScoreMetric::F1 { positive } => {
                        cm.f1(positive)?.ok_or(EvalError::UndefinedMetric)
                    }
                    ScoreMetric::Mse => unreachable!(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_scores: Vec<f64>,
    pub mean: f64,
}

/// Train and score the estimator once per fold (each fold is the test
/// set exactly once). Fold evaluations run in parallel; scores are
/// aggregated in fold order, so the result is schedule-independent.
pub fn cross_validate(
    d: &Dataset,
    plan: &FoldPlan,
    spec: &EstimatorSpec,
    metric: &ScoreMetric,
) -> Result<CvResult, EvalError> {
    let fold_scores: Vec<f64> = plan
        .folds
        .par_iter()
        .enumerate()
        .map(|(f, fold)| {
            let in_fold: std::collections::HashSet<usize> = fold.iter().copied().collect();
            let train_idx: Vec<usize> =
                (0..d.n_rows()).filter(|i| !in_fold.contains(i)).collect();
            let train = d.take_rows(&train_idx);
            let test = d.take_rows(fold);
            let model = spec.fit(&train, rng::derive(plan.seed, f as u64))?;
            metric.score(&model, &test)
        })
        .collect::<Result<_, EvalError>>()?;
    let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    Ok(CvResult { fold_scores, mean })
}

/// One bootstrap resample: `n_rows` draws with replacement plus the rows
/// never drawn.
#[derive(Debug, Clone)]
pub struct BootstrapSample {
    pub in_bag: Dataset,
    pub out_of_bag: Dataset,
    pub in_indices: Vec<usize>,
    pub oob_indices: Vec<usize>,
}

/// Draw `n` indices with replacement from `0..n`; the second vector
/// holds the indices never drawn, ascending.
pub fn bootstrap_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::Rng;
    let mut r = rng::seeded(seed);
    let mut drawn = vec![false; n];
    let in_indices: Vec<usize> = (0..n)
        .map(|_| {
            let i = r.random_range(0..n);
            drawn[i] = true;
            i
        })
        .collect();
    let oob_indices: Vec<usize> = (0..n).filter(|&i| !drawn[i]).collect();
    (in_indices, oob_indices)
}

pub fn bootstrap(d: &Dataset, seed: u64) -> Result<BootstrapSample, EvalError> {
    if d.n_rows() == 0 {
        return Err(EvalError::Empty);
    }
    let (in_indices, oob_indices) = bootstrap_indices(d.n_rows(), seed);
    Ok(BootstrapSample {
        in_bag: d.take_rows(&in_indices),
        out_of_bag: d.take_rows(&oob_indices),
        in_indices,
        oob_indices,
    })
}

/// One hyperparameter axis: a name and its candidate values, rendered as
/// spec-string fragments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamAxis {
    pub name: String,
    pub values: Vec<String>,
}

impl ParamAxis {
    pub fn list(name: &str, values: &[&str]) -> Self {
        ParamAxis {
            name: name.to_string(),
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    /// `count` evenly spaced reals on `[lo, hi]`.
    pub fn linspace(name: &str, lo: f64, hi: f64, count: usize) -> Self {
        let values = (0..count)
            .map(|i| {
                let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
                format!("{}", lo + t * (hi - lo))
            })
            .collect();
        ParamAxis { name: name.to_string(), values }
    }

    /// Integer range `lo..=hi`, step 1.
    pub fn int_range(name: &str, lo: i64, hi: i64) -> Self {
        ParamAxis {
            name: name.to_string(),
            values: (lo..=hi).map(|v| v.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Grid,
    Random { samples: usize, seed: u64 },
}

/// Candidate hyperparameter settings for one estimator family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub axes: Vec<ParamAxis>,
    pub mode: SearchMode,
}

impl SearchSpace {
    fn validate(&self) -> Result<(), EvalError> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.values.is_empty()) {
            return Err(EvalError::EmptySpace);
        }
        if let SearchMode::Random { samples, .. } = self.mode {
            if samples == 0 {
                return Err(EvalError::NoSamples);
            }
        }
        Ok(())
    }

    /// Full Cartesian product in deterministic order: axes in declaration
    /// order, values in declaration order, last axis fastest.
    fn product(&self) -> Vec<Vec<(String, String)>> {
        let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for axis in &self.axes {
            combos = combos
                .into_iter()
                .flat_map(|base| {
                    axis.values.iter().map(move |v| {
                        let mut c = base.clone();
                        c.push((axis.name.clone(), v.clone()));
                        c
                    })
                })
                .collect();
        }
        combos
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub spec: String,
    pub mean_score: f64,
    pub fold_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: CandidateScore,
    pub table: Vec<CandidateScore>,
}

/// Exhaustive grid evaluation; ties go to the first candidate in
/// enumeration order.
pub fn grid_search(
    d: &Dataset,
    space: &SearchSpace,
    base_spec: &str,
    plan: &FoldPlan,
    metric: &ScoreMetric,
) -> Result<SearchOutcome, EvalError> {
    space.validate()?;
    run_candidates(d, space.product(), base_spec, plan, metric)
}

/// Evaluate `samples` draws from the grid without replacement, in seeded
/// shuffle order. A sample count of at least the grid size degenerates
/// to exhaustive search.
pub fn random_search(
    d: &Dataset,
    space: &SearchSpace,
    base_spec: &str,
    plan: &FoldPlan,
    metric: &ScoreMetric,
) -> Result<SearchOutcome, EvalError> {
    space.validate()?;
    let combos = space.product();
    let (samples, seed) = match space.mode {
        SearchMode::Random { samples, seed } => (samples, seed),
        SearchMode::Grid => (combos.len(), 0),
    };
    let order = rng::shuffled_indices(combos.len(), seed);
    let chosen: Vec<Vec<(String, String)>> = order
        .into_iter()
        .take(samples.min(combos.len()))
        .map(|i| combos[i].clone())
        .collect();
    run_candidates(d, chosen, base_spec, plan, metric)
}

fn run_candidates(
    d: &Dataset,
    combos: Vec<Vec<(String, String)>>,
    base_spec: &str,
    plan: &FoldPlan,
    metric: &ScoreMetric,
) -> Result<SearchOutcome, EvalError> {
    let mut table = Vec::with_capacity(combos.len());
    for combo in combos {
        let spec_str = render_spec(base_spec, &combo);
        let spec = EstimatorSpec::parse(&spec_str)?;
        let cv = cross_validate(d, plan, &spec, metric)?;
        table.push(CandidateScore {
            spec: spec_str,
            mean_score: cv.mean,
            fold_scores: cv.fold_scores,
        });
    }
    let higher = metric.higher_is_better();
    let best = table
        .iter()
        .cloned()
        .reduce(|best, cand| {
            let better = if higher {
                cand.mean_score > best.mean_score
            } else {
                cand.mean_score < best.mean_score
            };
            if better {
                cand
            } else {
                best
            }
        })
        .ok_or(EvalError::EmptySpace)?;
    Ok(SearchOutcome { best, table })
}

fn render_spec(base: &str, params: &[(String, String)]) -> String {
    let mut out = String::from(base);
    for (k, v) in params {
        out.push(if out.contains(':') { ',' } else { ':' });
        out.push_str(k);
        out.push('=');
        out.push_str(v);
    }
    out
}
