//! Prototype, hierarchical, and density clustering plus validity
//! indices.

mod dbscan;
mod gmm;
mod hierarchy;
mod kmeans;

pub use dbscan::{dbscan, PointRole};
pub use gmm::{gmm_em, GmmInit, GmmModel, DEFAULT_RIDGE};
pub use hierarchy::{
    agglomerative, diana, Dendrogram, DendrogramKind, DianaSplit, Linkage, Step,
};
pub use kmeans::{kmeans, kmeans_with_centers, KMeansInit, KMeansModel};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataError;
use crate::distance::{DistanceError, DistanceMetric};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("k = {k} clusters requested for {n} rows")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be at least 1")]
    KZero,
    #[error("covariance matrix became singular (ridge disabled)")]
    SingularCovariance,
    #[error("distance matrix is not symmetric at ({0}, {1})")]
    AsymmetricMatrix(usize, usize),
    #[error("distance matrix has a negative entry at ({0}, {1})")]
    NegativeDistance(usize, usize),
    #[error("matrix is not square or has a nonzero diagonal")]
    MalformedMatrix,
    #[error("eps must be a positive real, got {0}")]
    InvalidEps(f64),
    #[error("min_pts must be at least 1")]
    InvalidMinPts,
    #[error("internal indices need at least two non-empty clusters")]
    SingleCluster,
    #[error("assignments cover different row counts ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("initialization needs exactly {expected} components, got {got}")]
    BadInit { expected: usize, got: usize },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Per-row cluster membership; `None` marks noise. Non-noise ids form a
/// contiguous `0..k` range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<Option<usize>>,
    pub k: usize,
}

impl ClusterAssignment {
    /// Wrap a label vector, renumbering ids into a contiguous range in
    /// order of first appearance.
    pub fn new(labels: Vec<Option<usize>>) -> Self {
        let mut remap: Vec<usize> = Vec::new();
        let labels = labels
            .into_iter()
            .map(|l| {
                l.map(|id| match remap.iter().position(|&r| r == id) {
                    Some(pos) => pos,
                    None => {
                        remap.push(id);
                        remap.len() - 1
                    }
                })
            })
            .collect();
        ClusterAssignment { k: remap.len(), labels }
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == Some(cluster))
            .collect()
    }

    pub fn noise_rows(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i].is_none())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExternalIndices {
    /// Jaccard coefficient `a/(a+b+c)`; undefined when no pair agrees
    /// anywhere.
    pub js: Option<f64>,
    /// Fowlkes–Mallows `√(a/(a+b) · a/(a+c))`.
    pub fmi: Option<f64>,
    /// Rand index `2(a+d)/(m(m−1))`.
    pub ri: f64,
}

/// Compare a clustering against a reference partition via pair counts.
/// Rows marked noise in either assignment are excluded first.
pub fn external_indices(
    a: &ClusterAssignment,
    reference: &ClusterAssignment,
) -> Result<ExternalIndices, ClusterError> {
    if a.labels.len() != reference.labels.len() {
        return Err(ClusterError::LengthMismatch(a.labels.len(), reference.labels.len()));
    }
    let rows: Vec<usize> = (0..a.labels.len())
        .filter(|&i| a.labels[i].is_some() && reference.labels[i].is_some())
        .collect();
    let m = rows.len();
    if m < 2 {
        return Err(ClusterError::SingleCluster);
    }
    let (mut ss, mut sd, mut ds, mut dd) = (0u64, 0u64, 0u64, 0u64);
    for (p, &i) in rows.iter().enumerate() {
        for &j in &rows[p + 1..] {
            let same_a = a.labels[i] == a.labels[j];
            let same_ref = reference.labels[i] == reference.labels[j];
            match (same_a, same_ref) {
                (true, true) => ss += 1,
                (true, false) => sd += 1,
                (false, true) => ds += 1,
                (false, false) => dd += 1,
            }
        }
    }
    debug_assert_eq!(ss + sd + ds + dd, (m as u64 * (m as u64 - 1)) / 2);
    let (a_, b, c, d) = (ss as f64, sd as f64, ds as f64, dd as f64);
    let js = (a_ + b + c > 0.0).then(|| a_ / (a_ + b + c));
    let fmi = (a_ + b > 0.0 && a_ + c > 0.0)
        .then(|| ((a_ / (a_ + b)) * (a_ / (a_ + c))).sqrt());
    let ri = 2.0 * (a_ + d) / (m as f64 * (m as f64 - 1.0));
    Ok(ExternalIndices { js, fmi, ri })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InternalIndices {
    /// Davies–Bouldin: lower is better.
    pub dbi: f64,
    /// Dunn: higher is better; `+∞` when every cluster is a singleton.
    pub di: f64,
}

/// Geometry-only cluster quality over Euclidean distance. Noise rows are
/// excluded; singleton clusters contribute zero intra-cluster spread.
pub fn internal_indices(
    d: &crate::data::Dataset,
    a: &ClusterAssignment,
) -> Result<InternalIndices, ClusterError> {
    let matrix = d.to_matrix()?;
    let metric = DistanceMetric::euclidean();
    let clusters: Vec<Vec<usize>> = (0..a.k)
        .map(|c| a.members(c))
        .filter(|m| !m.is_empty())
        .collect();
    if clusters.len() < 2 {
        return Err(ClusterError::SingleCluster);
    }
    let dist = |i: usize, j: usize| metric.eval(&matrix[i], &matrix[j]).unwrap();

    let avg: Vec<f64> = clusters.iter().map(|c| mean_pairwise(c, &dist)).collect();
    let diam: Vec<f64> = clusters.iter().map(|c| diameter(c, &dist)).collect();
    let centers: Vec<Vec<f64>> = clusters.iter().map(|c| centroid(&matrix, c)).collect();

    let mut dbi = 0.0;
    for i in 0..clusters.len() {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..clusters.len() {
            if i == j {
                continue;
            }
            let d_cen = metric.eval(&centers[i], &centers[j]).unwrap();
            let score = if d_cen > 0.0 {
                (avg[i] + avg[j]) / d_cen
            } else {
                f64::INFINITY
            };
            worst = worst.max(score);
        }
        dbi += worst;
    }
    dbi /= clusters.len() as f64;

    let max_diam = diam.iter().copied().fold(0.0, f64::max);
    let mut di = f64::INFINITY;
    for i in 0..clusters.len() {
        for j in 0..clusters.len() {
            if i == j {
                continue;
            }
            let mut d_min = f64::INFINITY;
            for &x in &clusters[i] {
                for &z in &clusters[j] {
                    d_min = d_min.min(dist(x, z));
                }
            }
            let ratio = if max_diam > 0.0 { d_min / max_diam } else { f64::INFINITY };
            di = di.min(ratio);
        }
    }
    Ok(InternalIndices { dbi, di })
}

fn mean_pairwise(members: &[usize], dist: &dyn Fn(usize, usize) -> f64) -> f64 {
    let n = members.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += dist(members[i], members[j]);
        }
    }
    2.0 * sum / (n as f64 * (n as f64 - 1.0))
}

fn diameter(members: &[usize], dist: &dyn Fn(usize, usize) -> f64) -> f64 {
    let mut max = 0.0f64;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            max = max.max(dist(members[i], members[j]));
        }
    }
    max
}

fn centroid(matrix: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let dim = matrix[0].len();
    let mut center = vec![0.0; dim];
    for &i in members {
        for (c, v) in center.iter_mut().zip(&matrix[i]) {
            *c += v;
        }
    }
    for c in &mut center {
        *c /= members.len() as f64;
    }
    center
}
