//! Lloyd-style k-means: alternate nearest-center assignment (Euclidean,
//! ties to the lower center index) and mean updates until assignments
//! stop changing. An emptied cluster is reseeded to the point farthest
//! from its previous center.

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterAssignment, ClusterError};
use crate::data::Dataset;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMeansInit {
    /// First k rows become the initial centers.
    FirstK,
    /// k distinct rows chosen by seeded shuffle.
    SeededRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centers: Vec<Vec<f64>>,
    /// Within-cluster sum of squares `Σᵢ Σ_{x∈Cᵢ} ‖x − μᵢ‖²` of the
    /// final assignment.
    pub objective: f64,
    pub iterations: usize,
}

fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn nearest_center(centers: &[Vec<f64>], row: &[f64]) -> usize {
    let mut best = (0usize, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(row, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}

pub fn kmeans(
    d: &Dataset,
    k: usize,
    init: KMeansInit,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<(KMeansModel, ClusterAssignment), ClusterError> {
    let rows = d.to_matrix()?;
    if k == 0 {
        return Err(ClusterError::KZero);
    }
    if k > rows.len() {
        return Err(ClusterError::KTooLarge { k, n: rows.len() });
    }
    let initial: Vec<Vec<f64>> = match init {
        KMeansInit::FirstK => rows.iter().take(k).cloned().collect(),
        KMeansInit::SeededRandom => {
            let order = rng::shuffled_indices(rows.len(), seed);
            order.iter().take(k).map(|&i| rows[i].clone()).collect()
        }
    };
    kmeans_with_centers(d, initial, max_iter, tol)
}

/// Run Lloyd iterations from explicit starting centers.
pub fn kmeans_with_centers(
    d: &Dataset,
    mut centers: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
) -> Result<(KMeansModel, ClusterAssignment), ClusterError> {
    let rows = d.to_matrix()?;
    let k = centers.len();
    if k == 0 {
        return Err(ClusterError::KZero);
    }
    if k > rows.len() {
        return Err(ClusterError::KTooLarge { k, n: rows.len() });
    }

    let mut assignment: Vec<usize> = vec![0; rows.len()];
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        // assignment step, reseeding any emptied cluster to the point
        // farthest from that cluster's previous center
        let mut next: Vec<usize>;
        loop {
            next = rows.iter().map(|r| nearest_center(&centers, r)).collect();
            let empty = (0..k).find(|&c| !next.contains(&c));
            match empty {
                None => break,
                Some(c) => {
                    let far = (0..rows.len())
                        .max_by(|&a, &b| {
                            squared_distance(&rows[a], &centers[c])
                                .total_cmp(&squared_distance(&rows[b], &centers[c]))
                        })
                        .unwrap();
                    centers[c] = rows[far].clone();
                }
            }
        }

        let unchanged = iterations > 1 && next == assignment;
        assignment = next;

        let mut new_centers = vec![vec![0.0; rows[0].len()]; k];
        let mut sizes = vec![0usize; k];
        for (row, &c) in rows.iter().zip(&assignment) {
            sizes[c] += 1;
            for (acc, v) in new_centers[c].iter_mut().zip(row) {
                *acc += v;
            }
        }
        for (center, &size) in new_centers.iter_mut().zip(&sizes) {
            for v in center.iter_mut() {
                *v /= size as f64;
            }
        }
        let shift = centers
            .iter()
            .zip(&new_centers)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centers = new_centers;

        if unchanged || shift < tol || iterations >= max_iter {
            break;
        }
    }

    let objective: f64 = rows
        .iter()
        .zip(&assignment)
        .map(|(row, &c)| squared_distance(row, &centers[c]))
        .sum();
    let model = KMeansModel { centers, objective, iterations };
    let labels = assignment.into_iter().map(Some).collect();
    Ok((model, ClusterAssignment::new(labels)))
}
