//! Gaussian mixture clustering via expectation-maximization.
//!
//! The E-step computes responsibilities γⱼᵢ = P(component i | xⱼ) under
//! the current parameters; the M-step re-estimates mixing weights,
//! means, and full covariances from them. Each covariance update adds a
//! relative ridge `ridge · trace(Σ̂)/dim · I` to stay positive definite.
//! The log-likelihood trace is recorded per iteration and is
//! non-decreasing.

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterAssignment, ClusterError};
use crate::data::Dataset;
use crate::linalg::{self, Matrix};
use crate::rng;

/// Default relative ridge factor for covariance updates.
pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum GmmInit {
    /// Means drawn from k distinct seeded rows; covariances start from
    /// the per-dimension data variance; uniform mixing weights.
    SeededRows,
    /// Explicit starting parameters.
    Params {
        mixing: Vec<f64>,
        means: Vec<Vec<f64>>,
        covariances: Vec<Matrix>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub mixing: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<Matrix>,
    /// Log-likelihood after each E-step.
    pub log_likelihood: Vec<f64>,
    /// Responsibilities γ from the final E-step; rows sum to 1.
    pub responsibilities: Vec<Vec<f64>>,
    pub iterations: usize,
}

struct Component {
    log_weight: f64,
    mean: Vec<f64>,
    chol: Matrix,
    log_det: f64,
}

impl Component {
    fn build(weight: f64, mean: Vec<f64>, cov: &Matrix) -> Result<Self, ClusterError> {
        let chol = linalg::cholesky(cov).ok_or(ClusterError::SingularCovariance)?;
        let log_det = linalg::cholesky_log_det(&chol);
        Ok(Component { log_weight: weight.ln(), mean, chol, log_det })
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let dim = x.len() as f64;
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let solved = linalg::cholesky_solve(&self.chol, &centered);
        let quad: f64 = centered.iter().zip(&solved).map(|(a, b)| a * b).sum();
        -0.5 * (dim * (2.0 * std::f64::consts::PI).ln() + self.log_det + quad)
    }
}

pub fn gmm_em(
    d: &Dataset,
    k: usize,
    init: GmmInit,
    seed: u64,
    max_iter: usize,
    tol: f64,
    ridge: f64,
) -> Result<(GmmModel, ClusterAssignment), ClusterError> {
    let rows = d.to_matrix()?;
    let (n, dim) = (rows.len(), rows.first().map_or(0, Vec::len));
    if k == 0 {
        return Err(ClusterError::KZero);
    }
    if k > n {
        return Err(ClusterError::KTooLarge { k, n });
    }

    let (mut mixing, mut means, mut covariances) = match init {
        GmmInit::Params { mixing, means, covariances } => {
            if mixing.len() != k || means.len() != k || covariances.len() != k {
                return Err(ClusterError::BadInit { expected: k, got: means.len() });
            }
            (mixing, means, covariances)
        }
        GmmInit::SeededRows => {
            let order = rng::shuffled_indices(n, seed);
            let means: Vec<Vec<f64>> = order.iter().take(k).map(|&i| rows[i].clone()).collect();
            let mut variances = vec![0.0; dim];
            let grand: Vec<f64> = centroid(&rows);
            for row in &rows {
                for (v, (x, m)) in variances.iter_mut().zip(row.iter().zip(&grand)) {
                    *v += (x - m) * (x - m);
                }
            }
            let cov: Matrix = (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| if i == j { variances[i] / n as f64 } else { 0.0 })
                        .collect()
                })
                .collect();
            let cov = ridged(cov, ridge);
            (vec![1.0 / k as f64; k], means, vec![cov; k])
        }
    };

    let mut log_likelihood = Vec::new();
    let mut responsibilities = vec![vec![0.0; k]; n];
    let mut iterations = 0usize;

    loop {
        iterations += 1;
        // E-step under the current parameters
        let components: Vec<Component> = mixing
            .iter()
            .zip(&means)
            .zip(&covariances)
            .map(|((&w, m), cov)| Component::build(w, m.clone(), cov))
            .collect::<Result<_, _>>()?;
        let mut ll = 0.0;
        for (gamma, row) in responsibilities.iter_mut().zip(&rows) {
            let logs: Vec<f64> = components
                .iter()
                .map(|c| c.log_weight + c.log_density(row))
                .collect();
            let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum_exp: f64 = logs.iter().map(|l| (l - max).exp()).sum();
            ll += max + sum_exp.ln();
            for (g, l) in gamma.iter_mut().zip(&logs) {
                *g = (l - max).exp() / sum_exp;
            }
        }
        log_likelihood.push(ll);
        let converged = log_likelihood.len() > 1
            && (ll - log_likelihood[log_likelihood.len() - 2]).abs() < tol;
        if converged || iterations >= max_iter {
            break;
        }

        // M-step
        for i in 0..k {
            let weight: f64 = responsibilities.iter().map(|g| g[i]).sum();
            mixing[i] = weight / n as f64;
            let mut mean = vec![0.0; dim];
            for (g, row) in responsibilities.iter().zip(&rows) {
                for (m, x) in mean.iter_mut().zip(row) {
                    *m += g[i] * x;
                }
            }
            for m in &mut mean {
                *m /= weight;
            }
            let mut cov = vec![vec![0.0; dim]; dim];
            for (g, row) in responsibilities.iter().zip(&rows) {
                let centered: Vec<f64> = row.iter().zip(&mean).map(|(x, m)| x - m).collect();
                for a in 0..dim {
                    for b in 0..dim {
                        cov[a][b] += g[i] * centered[a] * centered[b];
                    }
                }
            }
            for row in &mut cov {
                for v in row.iter_mut() {
                    *v /= weight;
                }
            }
            means[i] = mean;
            covariances[i] = ridged(cov, ridge);
        }
    }

    let labels = responsibilities
        .iter()
        .map(|gamma| {
            let best = gamma
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap();
            Some(best)
        })
        .collect();
    let model = GmmModel {
        mixing,
        means,
        covariances,
        log_likelihood,
        responsibilities,
        iterations,
    };
    Ok((model, ClusterAssignment::new(labels)))
}

fn ridged(mut cov: Matrix, ridge: f64) -> Matrix {
    if ridge > 0.0 {
        let dim = cov.len();
        let trace: f64 = (0..dim).map(|i| cov[i][i]).sum();
        let eps = ridge * trace / dim as f64;
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] += eps;
        }
    }
    cov
}

fn centroid(rows: &[Vec<f64>]) -> Vec<f64> {
    let dim = rows[0].len();
    let mut c = vec![0.0; dim];
    for row in rows {
        for (acc, v) in c.iter_mut().zip(row) {
            *acc += v;
        }
    }
    for v in &mut c {
        *v /= rows.len() as f64;
    }
    c
}
