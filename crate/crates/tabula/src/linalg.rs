//! Small dense linear algebra for desk-scale problems.
//!
//! Matrices are stored row-major as `Vec<Vec<f64>>`. Three routines cover
//! everything the toolkit needs: Gaussian elimination with partial
//! pivoting, Cholesky factorization for symmetric positive-definite
//! systems, and a cyclic Jacobi eigendecomposition for symmetric
//! matrices.

/// Row-major dense matrix.
pub type Matrix = Vec<Vec<f64>>;

/// `n x n` identity.
pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `pivot_tol`, which callers
/// treat as rank deficiency.
pub fn solve(a: &Matrix, b: &[f64], pivot_tol: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            row.push(b[i]);
            row
        })
        .collect();

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() < pivot_tol {
            return None;
        }
        m.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..=n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Cholesky factor `L` (lower triangular, `A = L Lᵀ`) of a symmetric
/// positive-definite matrix, or `None` if the matrix is not PD.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Solve `L Lᵀ x = b` given the Cholesky factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    // forward: L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[i][k] * y[k];
        }
        y[i] = acc / l[i][i];
    }
    // backward: Lᵀ x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = y[i];
        for k in i + 1..n {
            acc -= l[k][i] * x[k];
        }
        x[i] = acc / l[i][i];
    }
    x
}

/// Natural log of `det(A)` from a Cholesky factor.
pub fn cholesky_log_det(l: &Matrix) -> f64 {
    2.0 * l.iter().enumerate().map(|(i, row)| row[i].ln()).sum::<f64>()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps rotate away one off-diagonal element at a time until the total
/// off-diagonal norm drops below `off_tol`. Returns `(eigenvalues,
/// eigenvectors)` sorted by descending eigenvalue; eigenvector `i` is the
/// `i`-th row of the returned matrix. Convergence is quadratic; the sweep
/// cap is generous and never reached for the matrix orders used here.
pub fn jacobi_eigen(a: &Matrix, off_tol: f64) -> (Vec<f64>, Matrix) {
    let n = a.len();
    let mut m = a.clone();
    let mut v = identity(n);
    const MAX_SWEEPS: usize = 100;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p][q] * m[p][q])
            .sum::<f64>()
            .sqrt();
        if off < off_tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                // rotation angle that annihilates m[p][q]
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[k][p];
                    let mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p][k];
                    let mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let eigenvectors: Matrix = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row][col]).collect())
        .collect();
    (eigenvalues, eigenvectors)
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solve_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[5.0, 10.0], 1e-10).unwrap();
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn solve_detects_singularity() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&a, &[1.0, 2.0], 1e-10).is_none());
    }

    #[test]
    fn cholesky_round_trip() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let l = cholesky(&a).unwrap();
        let x = cholesky_solve(&l, &[8.0, 7.0]);
        assert_relative_eq!(4.0 * x[0] + 2.0 * x[1], 8.0, epsilon = 1e-12);
        assert_relative_eq!(2.0 * x[0] + 3.0 * x[1], 7.0, epsilon = 1e-12);
        assert_relative_eq!(cholesky_log_det(&l), (4.0f64 * 3.0 - 4.0).ln(), epsilon = 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(cholesky(&a).is_none());
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![vec![14.0, -11.0], vec![-11.0, 23.0]];
        let (vals, vecs) = jacobi_eigen(&a, 1e-12);
        // λ = (37 ± √565)/2
        let expected = 0.5 * (37.0 + 565.0f64.sqrt());
        assert_relative_eq!(vals[0], expected, epsilon = 1e-10);
        assert_relative_eq!(vals[0] + vals[1], 37.0, epsilon = 1e-10);
        // A e = λ e
        for (lambda, e) in vals.iter().zip(&vecs) {
            for row in 0..2 {
                let ae = dot(&a[row], e);
                assert_relative_eq!(ae, lambda * e[row], epsilon = 1e-9);
            }
        }
    }
}
