//! Ordinary least squares regression: simple, polynomial, and multiple.
//!
//! Coefficients come from the normal equations `XᵀX B = Xᵀy`, solved by
//! Gaussian elimination with partial pivoting. The simple and polynomial
//! forms expand a single input column; the multiple form prepends an
//! intercept to the raw feature matrix.

use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::supervised::SupervisedError;

/// Pivot threshold under which the normal equations are declared rank
/// deficient.
pub const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignForm {
    Simple,
    Polynomial { degree: usize },
    Multiple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsModel {
    /// Intercept first, then one coefficient per expanded design column.
    pub coefficients: Vec<f64>,
    pub form: DesignForm,
    pub n_features: usize,
}

fn design_row(form: DesignForm, features: &[f64]) -> Result<Vec<f64>, SupervisedError> {
    match form {
        DesignForm::Simple => {
            if features.len() != 1 {
                return Err(SupervisedError::WrongFeatureCount {
                    form: "simple",
                    got: features.len(),
                });
            }
            Ok(vec![1.0, features[0]])
        }
        DesignForm::Polynomial { degree } => {
            if features.len() != 1 {
                return Err(SupervisedError::WrongFeatureCount {
                    form: "polynomial",
                    got: features.len(),
                });
            }
            let x = features[0];
            let mut row = Vec::with_capacity(degree + 1);
            let mut power = 1.0;
            for _ in 0..=degree {
                row.push(power);
                power *= x;
            }
            Ok(row)
        }
        DesignForm::Multiple => {
            let mut row = Vec::with_capacity(features.len() + 1);
            row.push(1.0);
            row.extend_from_slice(features);
            Ok(row)
        }
    }
}

pub fn ols_fit(
    features: &[Vec<f64>],
    y: &[f64],
    form: DesignForm,
) -> Result<OlsModel, SupervisedError> {
    if features.len() != y.len() {
        return Err(SupervisedError::LengthMismatch(features.len(), y.len()));
    }
    if features.is_empty() {
        return Err(SupervisedError::EmptyDataset);
    }
    let design: Vec<Vec<f64>> = features
        .iter()
        .map(|row| design_row(form, row))
        .collect::<Result<_, _>>()?;
    let p = design[0].len();

    // normal equations: (XᵀX) B = Xᵀy
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, &target) in design.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * target;
            for j in 0..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    let coefficients =
        linalg::solve(&xtx, &xty, PIVOT_TOL).ok_or(SupervisedError::RankDeficient)?;
    Ok(OlsModel { coefficients, form, n_features: features[0].len() })
}

pub fn ols_predict(m: &OlsModel, features: &[Vec<f64>]) -> Result<Vec<f64>, SupervisedError> {
    features
        .iter()
        .map(|row| {
            let design = design_row(m.form, row)?;
            if design.len() != m.coefficients.len() {
                return Err(SupervisedError::FeatureCountMismatch {
                    expected: m.coefficients.len() - 1,
                    got: row.len(),
                });
            }
            Ok(linalg::dot(&design, &m.coefficients))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn column(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn simple_regression_worked_example() {
        let x = column(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = [1.00, 2.00, 1.30, 3.75, 2.25];
        let m = ols_fit(&x, &y, DesignForm::Simple).unwrap();
        // y = 0.785 + 0.425x
        assert_relative_eq!(m.coefficients[0], 0.785, epsilon = 1e-12);
        assert_relative_eq!(m.coefficients[1], 0.425, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_regression_worked_example() {
        let x = column(&[3.0, 4.0, 5.0, 6.0, 7.0]);
        let y = [2.5, 3.2, 3.8, 6.5, 11.5];
        let m = ols_fit(&x, &y, DesignForm::Polynomial { degree: 2 }).unwrap();
        assert_relative_eq!(m.coefficients[0], 12.428571428571, epsilon = 1e-6);
        assert_relative_eq!(m.coefficients[1], -5.512857142857, epsilon = 1e-6);
        assert_relative_eq!(m.coefficients[2], 0.764285714286, epsilon = 1e-6);
    }

    #[test]
    fn multiple_regression_worked_example() {
        let x = vec![
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![2.0, 2.0],
            vec![0.0, 1.0],
        ];
        let y = [3.25, 6.5, 3.5, 5.0];
        let m = ols_fit(&x, &y, DesignForm::Multiple).unwrap();
        assert_relative_eq!(m.coefficients[0], 2.0625, epsilon = 1e-9);
        assert_relative_eq!(m.coefficients[1], -2.3750, epsilon = 1e-9);
        assert_relative_eq!(m.coefficients[2], 3.2500, epsilon = 1e-9);
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let x = vec![
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![2.0, 2.0],
            vec![0.0, 1.0],
            vec![3.0, 0.5],
        ];
        let y = [3.25, 6.5, 3.5, 5.0, -1.0];
        let m = ols_fit(&x, &y, DesignForm::Multiple).unwrap();
        let pred = ols_predict(&m, &x).unwrap();
        let residuals: Vec<f64> = y.iter().zip(&pred).map(|(t, p)| t - p).collect();
        // Xᵀ(y − XB) = 0
        for col in 0..3 {
            let inner: f64 = x
                .iter()
                .zip(&residuals)
                .map(|(row, r)| {
                    let design = [1.0, row[0], row[1]];
                    design[col] * r
                })
                .sum();
            assert_relative_eq!(inner, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn rank_deficiency_detected() {
        // second column is twice the first
        let x = vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(
            ols_fit(&x, &y, DesignForm::Multiple),
            Err(SupervisedError::RankDeficient)
        ));
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            ols_fit(&column(&[1.0]), &[1.0, 2.0], DesignForm::Simple),
            Err(SupervisedError::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            ols_fit(&[vec![1.0, 2.0]], &[1.0], DesignForm::Simple),
            Err(SupervisedError::WrongFeatureCount { .. })
        ));
    }
}
