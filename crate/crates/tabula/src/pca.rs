//! Principal component analysis via eigendecomposition of the sample
//! covariance matrix.
//!
//! The covariance uses the 1/(N−1) convention; the symmetric
//! eigenproblem is solved by cyclic Jacobi rotations to an off-diagonal
//! norm below 1e-12. Eigenvector signs are fixed so the
//! largest-magnitude entry is positive, making the transform
//! deterministic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::linalg;

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("p = {p} components requested for {n} features")]
    PTooLarge { p: usize, n: usize },
    #[error("p must be at least 1")]
    PZero,
    #[error("covariance needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("rows have {got} features, model expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

pub const JACOBI_OFF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub means: Vec<f64>,
    /// All eigenvalues, descending; `Σ λᵢ = trace(S)`.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per eigenvalue, row-major.
    pub components: Vec<Vec<f64>>,
    /// Number of leading components used by transform/inverse.
    pub retained: usize,
}

pub fn pca_fit(d: &Dataset, p: usize) -> Result<PcaModel, PcaError> {
    let rows = d.to_matrix()?;
    let n = rows.len();
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }
    let dim = rows[0].len();
    if p == 0 {
        return Err(PcaError::PZero);
    }
    if p > dim {
        return Err(PcaError::PTooLarge { p, n: dim });
    }

    let mut means = vec![0.0; dim];
    for row in &rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }

    let mut cov = vec![vec![0.0; dim]; dim];
    for row in &rows {
        let centered: Vec<f64> = row.iter().zip(&means).map(|(v, m)| v - m).collect();
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] += centered[i] * centered[j];
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= (n - 1) as f64;
        }
    }

    let (eigenvalues, mut components) = linalg::jacobi_eigen(&cov, JACOBI_OFF_TOL);
    for e in &mut components {
        let dominant = e
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if dominant < 0.0 {
            for v in e.iter_mut() {
                *v = -*v;
            }
        }
    }
    Ok(PcaModel { means, eigenvalues, components, retained: p })
}

/// Project rows onto the retained components: `scores = F (x − x̄)`.
pub fn pca_transform(m: &PcaModel, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, PcaError> {
    rows.iter()
        .map(|row| {
            if row.len() != m.means.len() {
                return Err(PcaError::ShapeMismatch {
                    expected: m.means.len(),
                    got: row.len(),
                });
            }
            let centered: Vec<f64> = row.iter().zip(&m.means).map(|(v, mu)| v - mu).collect();
            Ok(m.components[..m.retained]
                .iter()
                .map(|e| linalg::dot(e, &centered))
                .collect())
        })
        .collect()
}

/// Map scores back to feature space: `x̂ = x̄ + Fᵀ scores`. With all
/// components retained this inverts [`pca_transform`] exactly.
pub fn pca_inverse(m: &PcaModel, scores: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, PcaError> {
    scores
        .iter()
        .map(|score| {
            if score.len() != m.retained {
                return Err(PcaError::ShapeMismatch {
                    expected: m.retained,
                    got: score.len(),
                });
            }
            let mut row = m.means.clone();
            for (e, &s) in m.components[..m.retained].iter().zip(score) {
                for (r, &v) in row.iter_mut().zip(e) {
                    *r += s * v;
                }
            }
            Ok(row)
        })
        .collect()
}

/// `λᵢ / Σλ` for every component.
pub fn explained_variance_ratio(m: &PcaModel) -> Vec<f64> {
    let total: f64 = m.eigenvalues.iter().sum();
    m.eigenvalues.iter().map(|l| l / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// the 2×4 worked example: X₁ = (4, 8, 13, 7), X₂ = (11, 4, 5, 14)
    fn book_data() -> Dataset {
        Dataset::from_rows(
            &["x1", "x2"],
            &[
                vec![4.0, 11.0],
                vec![8.0, 4.0],
                vec![13.0, 5.0],
                vec![7.0, 14.0],
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn covariance_and_spectrum_match_worked_example() {
        let d = book_data();
        let m = pca_fit(&d, 1).unwrap();
        assert_eq!(m.means, vec![8.0, 8.5]);
        // S = [[14, −11], [−11, 23]], λ = (37 ± √565)/2
        assert_relative_eq!(m.eigenvalues[0], 30.3849, epsilon = 1e-3);
        assert_relative_eq!(m.eigenvalues[1], 6.6151, epsilon = 1e-3);
        assert_relative_eq!(
            m.eigenvalues.iter().sum::<f64>(),
            37.0,
            epsilon = 1e-8
        );
        // e₁ = ±(0.5574, −0.8303)
        let e1 = &m.components[0];
        let sign = if e1[0] < 0.0 { -1.0 } else { 1.0 };
        assert_relative_eq!(sign * e1[0], 0.5574, epsilon = 1e-3);
        assert_relative_eq!(sign * e1[1], -0.8303, epsilon = 1e-3);
    }

    #[test]
    fn scores_match_worked_example_up_to_sign() {
        let d = book_data();
        let m = pca_fit(&d, 1).unwrap();
        let scores = pca_transform(&m, &d.to_matrix().unwrap()).unwrap();
        let expected = [-4.3052, 3.7361, 5.6928, -5.1238];
        let sign = if scores[0][0] * expected[0] < 0.0 { -1.0 } else { 1.0 };
        for (got, want) in scores.iter().zip(expected) {
            assert_relative_eq!(sign * got[0], want, epsilon = 1e-3);
        }
    }

    #[test]
    fn axis_aligned_data_recovers_axes() {
        // centered data with diagonal covariance diag(4, 1)
        let rows = vec![
            vec![-2.0, 1.0],
            vec![2.0, -1.0],
            vec![-2.0, -1.0],
            vec![2.0, 1.0],
        ];
        let d = Dataset::from_rows(&["a", "b"], &rows, None).unwrap();
        let m = pca_fit(&d, 2).unwrap();
        assert_relative_eq!(m.eigenvalues[0], 16.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(m.eigenvalues[1], 4.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(m.components[0][0].abs(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(m.components[0][1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn full_rank_round_trip_and_mean_maps_to_zero() {
        let d = book_data();
        let m = pca_fit(&d, 2).unwrap();
        let rows = d.to_matrix().unwrap();
        let scores = pca_transform(&m, &rows).unwrap();
        let back = pca_inverse(&m, &scores).unwrap();
        for (orig, rec) in rows.iter().zip(&back) {
            for (a, b) in orig.iter().zip(rec) {
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
        }
        let mean_scores = pca_transform(&m, &[m.means.clone()]).unwrap();
        assert!(mean_scores[0].iter().all(|s| s.abs() < 1e-12));
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let d = book_data();
        let m = pca_fit(&d, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let dot = crate::linalg::dot(&m.components[i], &m.components[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(dot, expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn explained_variance_sums_to_one() {
        let m = pca_fit(&book_data(), 1).unwrap();
        let ratios = explained_variance_ratio(&m);
        assert!(ratios.iter().all(|r| (0.0..=1.0).contains(r)));
        assert_relative_eq!(ratios.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reconstruction_error_equals_discarded_variance() {
        let d = book_data();
        let m = pca_fit(&d, 1).unwrap();
        let rows = d.to_matrix().unwrap();
        let n = rows.len() as f64;
        let back = pca_inverse(&m, &pca_transform(&m, &rows).unwrap()).unwrap();
        let mse: f64 = rows
            .iter()
            .zip(&back)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n;
        let discarded: f64 = m.eigenvalues[1..].iter().sum();
        assert_relative_eq!(mse, discarded * (n - 1.0) / n, epsilon = 1e-8);
    }

    #[test]
    fn transform_invariant_to_column_shift() {
        let d = book_data();
        let rows = d.to_matrix().unwrap();
        let shifted: Vec<Vec<f64>> =
            rows.iter().map(|r| vec![r[0] + 100.0, r[1]]).collect();
        let d2 = Dataset::from_rows(&["x1", "x2"], &shifted, None).unwrap();
        let m1 = pca_fit(&d, 2).unwrap();
        let m2 = pca_fit(&d2, 2).unwrap();
        let s1 = pca_transform(&m1, &rows).unwrap();
        let s2 = pca_transform(&m2, &shifted).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            for (x, y) in a.iter().zip(b) {
                assert_relative_eq!(x, y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn scores_uncorrelated() {
        let rows = vec![
            vec![1.0, 2.0, 0.5],
            vec![2.0, 1.0, 1.5],
            vec![3.0, 4.0, -0.5],
            vec![4.0, 3.0, 2.5],
            vec![5.0, 7.0, 0.0],
        ];
        let d = Dataset::from_rows(&["a", "b", "c"], &rows, None).unwrap();
        let m = pca_fit(&d, 3).unwrap();
        let scores = pca_transform(&m, &rows).unwrap();
        let n = scores.len() as f64;
        for i in 0..3 {
            for j in (i + 1)..3 {
                let mean_i: f64 = scores.iter().map(|s| s[i]).sum::<f64>() / n;
                let mean_j: f64 = scores.iter().map(|s| s[j]).sum::<f64>() / n;
                let cov: f64 = scores
                    .iter()
                    .map(|s| (s[i] - mean_i) * (s[j] - mean_j))
                    .sum::<f64>()
                    / (n - 1.0);
                assert_relative_eq!(cov, 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn guards() {
        let d = book_data();
        assert!(matches!(pca_fit(&d, 3), Err(PcaError::PTooLarge { p: 3, n: 2 })));
        assert!(matches!(pca_fit(&d, 0), Err(PcaError::PZero)));
        let tiny = Dataset::from_rows(&["x"], &[vec![1.0]], None).unwrap();
        assert!(matches!(pca_fit(&tiny, 1), Err(PcaError::TooFewRows(1))));
    }
}
