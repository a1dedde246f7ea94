//! Estimator specs and the fitted-model envelope.
//!
//! An [`EstimatorSpec`] is parsed from the `name:key=value,key=value`
//! micro-syntax used on the command line (`knn:k=5`,
//! `bagging:base=tree,T=25`, ...). Values that are themselves specs —
//! kernels, ensemble base learners — use `;` in place of `,` between
//! their own parameters so the outer split stays unambiguous.
//!
//! A [`FittedModel`] serializes to JSON as `{"type": ..., "params":
//! ...}` and embeds nested member models for ensembles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::distance::{DistanceError, DistanceMetric};
use crate::ensemble::{self, AdaBoostModel, BaggingModel, EnsembleError};
use crate::supervised::bayes::{nb_fit, nb_predict, NaiveBayesModel};
use crate::supervised::knn::{knn_fit, knn_predict, KnnModel};
use crate::supervised::ols::{ols_fit, ols_predict, DesignForm, OlsModel};
use crate::supervised::stump::{stump_fit_weighted, stump_predict, StumpModel};
use crate::supervised::tree::{tree_fit, tree_predict, SplitCriterion, TreeConfig, TreeModel};
use crate::supervised::SupervisedError;
use crate::svm::{
    decision_function, ovr_predict, svm_fit, svm_fit_ovr, Kernel, OvrSvmModel, SvmError,
    SvmModel,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("bad estimator spec {spec:?}: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error("model of type {model:?} does not predict {wanted} values")]
    WrongTarget { model: &'static str, wanted: &'static str },
    #[error("model json: {0}")]
    Json(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Supervised(#[from] SupervisedError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// Parsed estimator family plus hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    Knn { k: usize, metric: DistanceMetric },
    NaiveBayes { alpha: f64 },
    Tree { config: TreeConfig },
    Stump,
    Svm { c: f64, kernel: Kernel, tol: f64, max_passes: usize },
    Ols { form: DesignForm },
    Bagging { base: Box<EstimatorSpec>, t: usize },
    AdaBoost { base: Box<EstimatorSpec>, t: usize },
}

struct Params<'a> {
    spec: &'a str,
    pairs: BTreeMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn bad(&self, reason: impl Into<String>) -> ModelError {
        ModelError::BadSpec { spec: self.spec.to_string(), reason: reason.into() }
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.pairs.remove(key)
    }

    fn parse_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ModelError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| self.bad(format!("invalid value for {key}"))),
        }
    }

    fn finish(self) -> Result<(), ModelError> {
        if let Some(key) = self.pairs.keys().next() {
            return Err(ModelError::BadSpec {
                spec: self.spec.to_string(),
                reason: format!("unknown parameter {key:?}"),
            });
        }
        Ok(())
    }
}

impl EstimatorSpec {
    pub fn parse(spec: &str) -> Result<EstimatorSpec, ModelError> {
        Self::parse_nested(spec, 0)
    }

    fn parse_nested(spec: &str, depth: usize) -> Result<EstimatorSpec, ModelError> {
        // ensembles nest through base=...; keep hostile inputs from
        // recursing unboundedly
        if depth > 4 {
            return Err(ModelError::BadSpec {
                spec: spec.to_string(),
                reason: "estimator nesting deeper than 4 levels".into(),
            });
        }
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n, r),
            None => (spec, ""),
        };
        let mut pairs = BTreeMap::new();
        if !rest.is_empty() {
            for kv in rest.split(',') {
                let (k, v) = kv.split_once('=').ok_or_else(|| ModelError::BadSpec {
                    spec: spec.to_string(),
                    reason: format!("expected key=value, got {kv:?}"),
                })?;
                if pairs.insert(k, v).is_some() {
                    return Err(ModelError::BadSpec {
                        spec: spec.to_string(),
                        reason: format!("duplicate parameter {k:?}"),
                    });
                }
            }
        }
        let mut p = Params { spec, pairs };

        let parsed = match name {
            "knn" => {
                let k = p.parse_or("k", 5usize)?;
                if k == 0 {
                    return Err(p.bad("k must be at least 1"));
                }
                let metric = match p.take("metric") {
                    None => DistanceMetric::euclidean(),
                    Some(m) => DistanceMetric::parse(&m.replace(';', ","))?,
                };
                EstimatorSpec::Knn { k, metric }
            }
            "nb" => {
                let alpha = p.parse_or("alpha", 1.0f64)?;
                if !(alpha >= 0.0) {
                    return Err(p.bad("alpha must be non-negative"));
                }
                EstimatorSpec::NaiveBayes { alpha }
            }
            "tree" => {
                let criterion = match p.take("criterion") {
                    None => SplitCriterion::EntropyGain,
                    Some(c) => SplitCriterion::parse(c)
                        .ok_or_else(|| p.bad("criterion must be entropy or gini"))?,
                };
                let max_depth = match p.take("max_depth") {
                    None => None,
                    Some(v) => Some(
                        v.parse::<usize>()
                            .map_err(|_| p.bad("invalid value for max_depth"))?,
                    ),
                };
                let min_leaf = p.parse_or("min_leaf", 1usize)?;
                if min_leaf == 0 {
                    return Err(p.bad("min_leaf must be at least 1"));
                }
                EstimatorSpec::Tree { config: TreeConfig { criterion, max_depth, min_leaf } }
            }
            "stump" => EstimatorSpec::Stump,
            "svm" => {
                let c = p.parse_or("C", 1.0f64)?;
                if !(c > 0.0) {
                    return Err(p.bad("C must be positive"));
                }
                let kernel = match p.take("kernel") {
                    None => Kernel::Rbf { sigma: 1.0 },
                    Some(k) => Kernel::parse(&k.replace(';', ","))?,
                };
                let tol = p.parse_or("tol", crate::svm::DEFAULT_TOL)?;
                let max_passes = p.parse_or("max_passes", crate::svm::DEFAULT_MAX_PASSES)?;
                EstimatorSpec::Svm { c, kernel, tol, max_passes }
            }
            "ols" => {
                let form = match p.take("form") {
                    None | Some("multiple") => DesignForm::Multiple,
                    Some("simple") => DesignForm::Simple,
                    Some("poly") => {
                        let degree = p.parse_or("degree", 2usize)?;
                        if degree == 0 {
                            return Err(p.bad("degree must be at least 1"));
                        }
                        DesignForm::Polynomial { degree }
                    }
                    Some(other) => {
                        return Err(p.bad(format!("unknown form {other:?}")));
                    }
                };
                EstimatorSpec::Ols { form }
            }
            "bagging" | "adaboost" => {
                let base_default = if name == "bagging" { "tree" } else { "stump" };
                let base_str = p.take("base").unwrap_or(base_default).replace(';', ",");
                let base = Box::new(EstimatorSpec::parse_nested(&base_str, depth + 1)?);
                let t = p.parse_or("T", 25usize)?;
                if t == 0 {
                    return Err(p.bad("T must be at least 1"));
                }
                if name == "bagging" {
                    EstimatorSpec::Bagging { base, t }
                } else {
                    EstimatorSpec::AdaBoost { base, t }
                }
            }
            other => {
                return Err(ModelError::BadSpec {
                    spec: spec.to_string(),
                    reason: format!("unknown estimator {other:?}"),
                });
            }
        };
        p.finish()?;
        Ok(parsed)
    }

    /// Train on a labeled dataset. `seed` feeds only the stochastic
    /// estimators (ensembles); the rest are deterministic.
    pub fn fit(&self, d: &Dataset, seed: u64) -> Result<FittedModel, ModelError> {
        Ok(match self {
            EstimatorSpec::Knn { k, metric } => {
                FittedModel::Knn(knn_fit(d, *k, metric.clone())?)
            }
            EstimatorSpec::NaiveBayes { alpha } => FittedModel::NaiveBayes(nb_fit(d, *alpha)?),
            EstimatorSpec::Tree { config } => {
                FittedModel::Tree(tree_fit(d, config, false, None)?)
            }
            EstimatorSpec::Stump => {
                let weights = vec![1.0 / d.n_rows().max(1) as f64; d.n_rows()];
                FittedModel::Stump(stump_fit_weighted(d, &weights)?)
            }
            EstimatorSpec::Svm { c, kernel, tol, max_passes } => {
                // binary data trains one machine; more classes compose
                // one-vs-rest automatically
                if d.classes()?.len() == 2 {
                    FittedModel::Svm(svm_fit(d, *c, kernel.clone(), *tol, *max_passes)?)
                } else {
                    FittedModel::SvmOvr(svm_fit_ovr(d, *c, kernel.clone(), *tol, *max_passes)?)
                }
            }
            EstimatorSpec::Ols { form } => {
                let x = d.to_matrix()?;
                let y = d.label_numbers()?;
                FittedModel::Ols(ols_fit(&x, &y, *form)?)
            }
            EstimatorSpec::Bagging { base, t } => {
                FittedModel::Bagging(ensemble::bagging_fit(d, base, *t, seed)?)
            }
            EstimatorSpec::AdaBoost { base, t } => {
                FittedModel::AdaBoost(ensemble::adaboost_fit(d, base, *t)?)
            }
        })
    }
}

/// Every trained model the toolkit can persist and reload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "kebab-case")]
pub enum FittedModel {
    Knn(KnnModel),
    NaiveBayes(NaiveBayesModel),
    Tree(TreeModel),
    Stump(StumpModel),
    Svm(SvmModel),
    SvmOvr(OvrSvmModel),
    Ols(OlsModel),
    Bagging(BaggingModel),
    AdaBoost(AdaBoostModel),
    Pca(crate::pca::PcaModel),
    KMeans(crate::clustering::KMeansModel),
}

impl FittedModel {
    fn type_name(&self) -> &'static str {
        match self {
            FittedModel::Knn(_) => "knn",
            FittedModel::NaiveBayes(_) => "naive-bayes",
            FittedModel::Tree(_) => "tree",
            FittedModel::Stump(_) => "stump",
            FittedModel::Svm(_) => "svm",
            FittedModel::SvmOvr(_) => "svm-ovr",
            FittedModel::Ols(_) => "ols",
            FittedModel::Bagging(_) => "bagging",
            FittedModel::AdaBoost(_) => "adaboost",
            FittedModel::Pca(_) => "pca",
            FittedModel::KMeans(_) => "k-means",
        }
    }

    /// Class predictions for every row of `d`.
    pub fn predict_labels(&self, d: &Dataset) -> Result<Vec<String>, ModelError> {
        match self {
            FittedModel::Knn(m) => Ok(knn_predict(m, &d.to_matrix()?)?),
            FittedModel::NaiveBayes(m) => Ok(nb_predict(m, d)?),
            FittedModel::Tree(m) => Ok(tree_predict(m, d)?),
            FittedModel::Stump(m) => Ok(stump_predict(m, &d.to_matrix()?)),
            FittedModel::Svm(m) => {
                let rows = d.to_matrix()?;
                rows.iter()
                    .map(|r| crate::svm::svm_predict(m, r).map_err(ModelError::from))
                    .collect()
            }
            FittedModel::SvmOvr(m) => {
                let rows = d.to_matrix()?;
                rows.iter()
                    .map(|r| ovr_predict(m, r).map_err(ModelError::from))
                    .collect()
            }
            FittedModel::Bagging(m) => Ok(ensemble::bagging_predict(m, d)?),
            FittedModel::AdaBoost(m) => Ok(ensemble::adaboost_predict(m, d)?),
            FittedModel::Ols(_) | FittedModel::Pca(_) | FittedModel::KMeans(_) => {
                Err(ModelError::WrongTarget { model: self.type_name(), wanted: "class" })
            }
        }
    }

    /// Regression predictions for every row of `d`.
    pub fn predict_numbers(&self, d: &Dataset) -> Result<Vec<f64>, ModelError> {
        match self {
            FittedModel::Ols(m) => Ok(ols_predict(m, &d.to_matrix()?)?),
            FittedModel::Bagging(m)
                if m.combination == crate::ensemble::Combination::Mean =>
            {
                Ok(ensemble::bagging_predict_numbers(m, d)?)
            }
            _ => Err(ModelError::WrongTarget { model: self.type_name(), wanted: "numeric" }),
        }
    }

    /// Signed per-row decision values for binary margin models.
    pub fn decision_values(&self, d: &Dataset) -> Result<Vec<f64>, ModelError> {
        match self {
            FittedModel::Svm(m) => {
                let rows = d.to_matrix()?;
                rows.iter()
                    .map(|r| decision_function(m, r).map_err(ModelError::from))
                    .collect()
            }
            _ => Err(ModelError::WrongTarget { model: self.type_name(), wanted: "decision" }),
        }
    }

    /// JSON with sorted keys in the `{"type": ..., "params": ...}`
    /// envelope.
    pub fn to_json_string(&self) -> Result<String, ModelError> {
        let value = serde_json::to_value(self).map_err(|e| ModelError::Json(e.to_string()))?;
        serde_json::to_string_pretty(&value).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<FittedModel, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 5) as f64]).collect();
        let labels: Vec<String> = (0..20)
            .map(|i| if i < 10 { "lo".into() } else { "hi".into() })
            .collect();
        Dataset::from_rows(&["a", "b"], &rows, Some(("y", labels))).unwrap()
    }

    #[test]
    fn spec_round_trips_through_fit() {
        let d = labeled();
        for spec in [
            "knn:k=3",
            "knn:k=3,metric=manhattan",
            "nb",
            "nb:alpha=0.5",
            "tree:criterion=gini,max_depth=2",
            "stump",
            "svm:C=10,kernel=linear",
            "bagging:base=stump,T=3",
            "adaboost:base=stump,T=3",
        ] {
            let parsed = EstimatorSpec::parse(spec).expect(spec);
            let model = parsed.fit(&d, 1).expect(spec);
            let preds = model.predict_labels(&d).expect(spec);
            assert_eq!(preds.len(), d.n_rows(), "{spec}");
        }
    }

    #[test]
    fn bad_specs_rejected() {
        for spec in [
            "unknown",
            "knn:k=0",
            "knn:k=abc",
            "knn:bogus=1",
            "nb:alpha=-1",
            "tree:criterion=magic",
            "svm:C=0",
            "bagging:T=0",
            "knn:k",
            "knn:k=1,k=2",
        ] {
            assert!(EstimatorSpec::parse(spec).is_err(), "{spec} should fail");
        }
    }

    #[test]
    fn nested_specs_use_semicolons() {
        let spec = EstimatorSpec::parse("bagging:base=tree:max_depth=1;min_leaf=2,T=4").unwrap();
        match spec {
            EstimatorSpec::Bagging { base, t } => {
                assert_eq!(t, 4);
                match *base {
                    EstimatorSpec::Tree { config } => {
                        assert_eq!(config.max_depth, Some(1));
                        assert_eq!(config.min_leaf, 2);
                    }
                    other => panic!("unexpected base {other:?}"),
                }
            }
            other => panic!("unexpected spec {other:?}"),
        }
        let svm = EstimatorSpec::parse("svm:kernel=sigmoid:alpha=0.1;c=-1").unwrap();
        match svm {
            EstimatorSpec::Svm { kernel: Kernel::Sigmoid { alpha, c }, .. } => {
                assert_eq!(alpha, 0.1);
                assert_eq!(c, -1.0);
            }
            other => panic!("unexpected spec {other:?}"),
        }
    }

    #[test]
    fn model_json_round_trip_preserves_predictions() {
        let d = labeled();
        for spec in ["knn:k=3", "nb", "tree", "svm:kernel=linear", "bagging:base=stump,T=3"] {
            let model = EstimatorSpec::parse(spec).unwrap().fit(&d, 7).unwrap();
            let json = model.to_json_string().unwrap();
            let back = FittedModel::from_json_str(&json).unwrap();
            assert_eq!(
                model.predict_labels(&d).unwrap(),
                back.predict_labels(&d).unwrap(),
                "{spec}"
            );
            let value: serde_json::Value = serde_json::from_str(&json).unwrap();
            assert!(value.get("type").is_some(), "{spec} missing type tag");
            assert!(value.get("params").is_some(), "{spec} missing params");
        }
    }

    #[test]
    fn multiclass_svm_becomes_one_vs_rest() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let labels: Vec<String> = (0..30).map(|i| format!("c{}", i / 10)).collect();
        let d = Dataset::from_rows(&["x"], &rows, Some(("y", labels))).unwrap();
        let model = EstimatorSpec::parse("svm:kernel=linear,C=10")
            .unwrap()
            .fit(&d, 0)
            .unwrap();
        assert!(matches!(model, FittedModel::SvmOvr(_)));
        let preds = model.predict_labels(&d).unwrap();
        let correct = preds
            .iter()
            .zip(d.label_strings().unwrap())
            .filter(|(p, t)| **p == *t)
            .count();
        assert!(correct >= 24, "one-vs-rest accuracy too low: {correct}/30");
    }
}
