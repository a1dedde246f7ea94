//! Classical machine-learning toolkit built around small, fully worked
//! numeric examples.
//!
//! The crate covers the usual desk-scale territory: dataset ingestion and
//! scaling ([`data`]), dissimilarity functions ([`distance`]), resampling
//! protocols and metrics ([`evaluation`]), supervised learners
//! ([`supervised`], [`svm`]), clustering ([`clustering`]), PCA
//! ([`pca`]), and ensembles ([`ensemble`]). Every algorithm is written
//! directly against its textbook formulation; there are no bindings to
//! external numerical libraries.
//!
//! All stochastic operations take an explicit 64-bit seed and are
//! reproducible bit-for-bit across platforms.

pub mod clustering;
pub mod data;
pub mod distance;
pub mod ensemble;
pub mod evaluation;
pub mod linalg;
pub mod model;
pub mod pca;
pub mod rng;
pub mod supervised;
pub mod svm;

pub use data::{Dataset, ScalerKind, ScalerParams};
pub use distance::DistanceMetric;
pub use evaluation::{ConfusionMatrix, FoldPlan, SearchSpace};
pub use model::{EstimatorSpec, FittedModel};
