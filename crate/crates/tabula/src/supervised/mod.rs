//! Supervised learners with a uniform fit/predict contract: KNN, naive
//! Bayes, decision trees, OLS regression, and the weighted decision
//! stump used as a boosting base learner.

pub mod bayes;
pub mod knn;
pub mod ols;
pub mod stump;
pub mod tree;

use thiserror::Error;

use crate::data::DataError;
use crate::distance::DistanceError;

#[derive(Debug, Error)]
pub enum SupervisedError {
    #[error("k = {k} exceeds the {n} training rows")]
    KExceedsData { k: usize, n: usize },
    #[error("k must be at least 1")]
    KZero,
    #[error("category {value:?} of feature {feature:?} was never seen in training")]
    UnknownCategoryAtPredict { feature: String, value: String },
    #[error("empty dataset")]
    EmptyDataset,
    #[error("post-pruning requires a validation dataset")]
    ValidationRequiredForPostPrune,
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("feature and target lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{form} regression expects exactly one feature column, got {got}")]
    WrongFeatureCount { form: &'static str, got: usize },
    #[error("prediction rows have {got} features, model expects {expected}")]
    FeatureCountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}
