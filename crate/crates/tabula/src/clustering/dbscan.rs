//! Density-based clustering with the (ε, MinPts) neighborhood model.
//!
//! A point is core when its ε-neighborhood — which includes the point
//! itself — holds at least `min_pts` points. Clusters grow by seed-list
//! expansion over unprocessed core points in ascending row order; border
//! points join the first cluster that reaches them (so border membership
//! is order-dependent, core/noise status is not).

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterAssignment, ClusterError};
use crate::data::Dataset;
use crate::distance::DistanceMetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointRole {
    Core,
    Border,
    Noise,
}

pub fn dbscan(
    d: &Dataset,
    eps: f64,
    min_pts: usize,
    metric: &DistanceMetric,
) -> Result<(ClusterAssignment, Vec<PointRole>), ClusterError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(ClusterError::InvalidEps(eps));
    }
    if min_pts == 0 {
        return Err(ClusterError::InvalidMinPts);
    }
    let rows = d.to_matrix()?;
    let n = rows.len();

    let mut neighborhoods: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut near = Vec::new();
        for j in 0..n {
            if metric.eval(&rows[i], &rows[j])? <= eps {
                near.push(j);
            }
        }
        neighborhoods.push(near);
    }
    let is_core: Vec<bool> = neighborhoods.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut cluster = 0usize;
    for start in 0..n {
        if !is_core[start] || labels[start].is_some() {
            continue;
        }
        // seed-list expansion from this core point
        let mut seeds = std::collections::VecDeque::from([start]);
        labels[start] = Some(cluster);
        while let Some(p) = seeds.pop_front() {
            if !is_core[p] {
                continue;
            }
            for &q in &neighborhoods[p] {
                if labels[q].is_none() {
                    labels[q] = Some(cluster);
                    seeds.push_back(q);
                }
            }
        }
        cluster += 1;
    }

    let roles = (0..n)
        .map(|i| {
            if is_core[i] {
                PointRole::Core
            } else if labels[i].is_some() {
                PointRole::Border
            } else {
                PointRole::Noise
            }
        })
        .collect();
    Ok((ClusterAssignment::new(labels), roles))
}
