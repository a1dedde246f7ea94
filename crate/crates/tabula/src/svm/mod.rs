//! Soft-margin kernel SVM trained by sequential minimal optimization on
//! the dual problem.
//!
//! Binary training maps the lexicographically smaller class label to −1
//! and the larger to +1. Multiclass problems are handled by one-vs-rest
//! composition: one binary machine per class, predicting by the largest
//! decision value.

mod smo;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::linalg::dot;

pub use smo::kkt_max_violation;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("svm training needs exactly two classes, found {0}")]
    NotBinary(usize),
    #[error("smo did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("rows have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("penalty C must be positive, got {0}")]
    InvalidPenalty(f64),
    #[error("bad kernel spec {0:?}")]
    BadKernelSpec(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Kernel function `k(x, y)` by kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Kernel {
    Linear,
    Polynomial { degree: u32 },
    Rbf { sigma: f64 },
    Laplacian { sigma: f64 },
    Sigmoid { alpha: f64, c: f64 },
}

impl Kernel {
    /// Parse a CLI kernel spec: `linear`, `poly:d=2`, `rbf:sigma=0.5`
    /// (`rbf:gamma=…` accepted as an alias, γ = 1/(2σ²)),
    /// `laplacian:sigma=0.5`, `sigmoid:alpha=0.01,c=0`.
    pub fn parse(spec: &str) -> Result<Kernel, SvmError> {
        let bad = || SvmError::BadKernelSpec(spec.to_string());
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n, p),
            None => (spec, ""),
        };
        let mut pairs = std::collections::BTreeMap::new();
        if !params.is_empty() {
            for kv in params.split(',') {
                let (k, v) = kv.split_once('=').ok_or_else(bad)?;
                if pairs.insert(k, v).is_some() {
                    return Err(bad());
                }
            }
        }
        let real = |key: &str| -> Result<f64, SvmError> {
            pairs
                .get(key)
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(bad)
        };
        let kernel = match name {
            "linear" if pairs.is_empty() => Kernel::Linear,
            "poly" => {
                let d = pairs
                    .get("d")
                    .and_then(|v| v.parse::<u32>().ok())
                    .filter(|&d| d >= 1)
                    .ok_or_else(bad)?;
                if pairs.len() != 1 {
                    return Err(bad());
                }
                Kernel::Polynomial { degree: d }
            }
            "rbf" if pairs.len() == 1 => {
                if pairs.contains_key("sigma") {
                    let sigma = real("sigma")?;
                    if sigma <= 0.0 {
                        return Err(bad());
                    }
                    Kernel::Rbf { sigma }
                } else {
                    let gamma = real("gamma")?;
                    if gamma <= 0.0 {
                        return Err(bad());
                    }
                    Kernel::Rbf { sigma: (1.0 / (2.0 * gamma)).sqrt() }
                }
            }
            "laplacian" if pairs.len() == 1 => {
                let sigma = real("sigma")?;
                if sigma <= 0.0 {
                    return Err(bad());
                }
                Kernel::Laplacian { sigma }
            }
            "sigmoid" if pairs.len() == 2 => {
                Kernel::Sigmoid { alpha: real("alpha")?, c: real("c")? }
            }
            _ => return Err(bad()),
        };
        Ok(kernel)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, SvmError> {
        if x.len() != y.len() {
            return Err(SvmError::LengthMismatch(x.len(), y.len()));
        }
        Ok(match self {
            Kernel::Linear => dot(x, y),
            Kernel::Polynomial { degree } => dot(x, y).powi(*degree as i32),
            Kernel::Rbf { sigma } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * sigma * sigma)).exp()
            }
            Kernel::Laplacian { sigma } => {
                let norm: f64 = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (-norm / sigma).exp()
            }
            Kernel::Sigmoid { alpha, c } => (alpha * dot(x, y) + c).tanh(),
        })
    }
}

/// Fitted binary machine: support rows, their ±1 labels and multipliers,
/// and the bias. Rows with αᵢ = 0 are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_rows: Vec<Vec<f64>>,
    pub support_labels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub penalty: f64,
    pub kernel: Kernel,
    pub class_neg: String,
    pub class_pos: String,
    /// Solver diagnostics for verification; not part of the model proper.
    #[serde(skip, default)]
    pub diagnostics: Option<SvmDiagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmDiagnostics {
    /// Multipliers for every training row, in input order.
    pub full_alphas: Vec<f64>,
    /// Dual objective after each sweep; non-decreasing.
    pub dual_trace: Vec<f64>,
    pub sweeps: usize,
}

/// Default KKT tolerance.
pub const DEFAULT_TOL: f64 = 1e-3;
/// Default number of consecutive quiet sweeps before termination.
pub const DEFAULT_MAX_PASSES: usize = 5;

pub fn svm_fit(
    d: &Dataset,
    c: f64,
    kernel: Kernel,
    tol: f64,
    max_passes: usize,
) -> Result<SvmModel, SvmError> {
    let rows = d.to_matrix().map_err(SvmError::Data)?;
    let labels = d.label_strings().map_err(SvmError::Data)?;
    let classes = d.classes().map_err(SvmError::Data)?;
    if classes.len() != 2 {
        return Err(SvmError::NotBinary(classes.len()));
    }
    let y: Vec<f64> = labels
        .iter()
        .map(|l| if l == &classes[1] { 1.0 } else { -1.0 })
        .collect();
    let mut model = fit_numeric(&rows, &y, c, kernel, tol, max_passes)?;
    model.class_neg = classes[0].clone();
    model.class_pos = classes[1].clone();
    Ok(model)
}

pub(crate) fn fit_numeric(
    rows: &[Vec<f64>],
    y: &[f64],
    c: f64,
    kernel: Kernel,
    tol: f64,
    max_passes: usize,
) -> Result<SvmModel, SvmError> {
    if c <= 0.0 {
        return Err(SvmError::InvalidPenalty(c));
    }
    let solution = smo::solve(rows, y, c, &kernel, tol, max_passes)?;
    let mut support_rows = Vec::new();
    let mut support_labels = Vec::new();
    let mut alphas = Vec::new();
    for (i, &a) in solution.alphas.iter().enumerate() {
        if a > 1e-12 {
            support_rows.push(rows[i].clone());
            support_labels.push(y[i]);
            alphas.push(a);
        }
    }
    Ok(SvmModel {
        support_rows,
        support_labels,
        alphas,
        bias: solution.b,
        penalty: c,
        kernel,
        class_neg: String::new(),
        class_pos: String::new(),
        diagnostics: Some(SvmDiagnostics {
            full_alphas: solution.alphas,
            dual_trace: solution.dual_trace,
            sweeps: solution.sweeps,
        }),
    })
}

/// Signed score `Σ αᵢ yᵢ k(xᵢ, row) + b`.
pub fn decision_function(m: &SvmModel, row: &[f64]) -> Result<f64, SvmError> {
    let mut sum = m.bias;
    for ((sv, &y), &a) in m.support_rows.iter().zip(&m.support_labels).zip(&m.alphas) {
        sum += a * y * m.kernel.eval(sv, row)?;
    }
    Ok(sum)
}

/// Sign of the decision value, with 0 mapped to the positive class.
pub fn svm_predict(m: &SvmModel, row: &[f64]) -> Result<String, SvmError> {
    let score = decision_function(m, row)?;
    Ok(if score >= 0.0 { m.class_pos.clone() } else { m.class_neg.clone() })
}

/// One-vs-rest composition over N classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrSvmModel {
    pub classes: Vec<String>,
    pub machines: Vec<SvmModel>,
}

pub fn svm_fit_ovr(
    d: &Dataset,
    c: f64,
    kernel: Kernel,
    tol: f64,
    max_passes: usize,
) -> Result<OvrSvmModel, SvmError> {
    let rows = d.to_matrix().map_err(SvmError::Data)?;
    let labels = d.label_strings().map_err(SvmError::Data)?;
    let classes = d.classes().map_err(SvmError::Data)?;
    if classes.len() < 2 {
        return Err(SvmError::NotBinary(classes.len()));
    }
    let machines = classes
        .iter()
        .map(|class| {
            let y: Vec<f64> = labels
                .iter()
                .map(|l| if l == class { 1.0 } else { -1.0 })
                .collect();
            let mut m = fit_numeric(&rows, &y, c, kernel.clone(), tol, max_passes)?;
            m.class_pos = class.clone();
            m.class_neg = format!("not-{class}");
            Ok(m)
        })
        .collect::<Result<Vec<_>, SvmError>>()?;
    Ok(OvrSvmModel { classes, machines })
}

/// Predict by the machine with the largest decision value; ties go to
/// the earlier class.
pub fn ovr_predict(m: &OvrSvmModel, row: &[f64]) -> Result<String, SvmError> {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, machine) in m.machines.iter().enumerate() {
        let score = decision_function(machine, row)?;
        if score > best.1 {
            best = (i, score);
        }
    }
    Ok(m.classes[best.0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn kernel_trick_worked_example() {
        let k = Kernel::Polynomial { degree: 2 };
        assert_eq!(k.eval(&[2.0, 3.0, 4.0], &[3.0, 4.0, 5.0]).unwrap(), 1444.0);
    }

    #[test]
    fn kernel_trivial_values() {
        let rbf = Kernel::Rbf { sigma: 0.7 };
        assert_eq!(rbf.eval(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(Kernel::Linear.eval(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let lap = Kernel::Laplacian { sigma: 0.5 };
        assert_eq!(lap.eval(&[3.0], &[3.0]).unwrap(), 1.0);
        assert!(matches!(
            Kernel::Linear.eval(&[1.0], &[1.0, 2.0]),
            Err(SvmError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn kernel_spec_parsing() {
        assert_eq!(Kernel::parse("linear").unwrap(), Kernel::Linear);
        assert_eq!(Kernel::parse("poly:d=2").unwrap(), Kernel::Polynomial { degree: 2 });
        assert_eq!(Kernel::parse("rbf:sigma=0.5").unwrap(), Kernel::Rbf { sigma: 0.5 });
        assert_eq!(
            Kernel::parse("sigmoid:alpha=0.1,c=-1").unwrap(),
            Kernel::Sigmoid { alpha: 0.1, c: -1.0 }
        );
        // gamma alias: γ = 1/(2σ²)
        let k = Kernel::parse("rbf:gamma=2").unwrap();
        match k {
            Kernel::Rbf { sigma } => assert_relative_eq!(sigma, 0.5),
            _ => panic!(),
        }
        for bad in ["poly", "rbf:sigma=-1", "poly:d=0", "mystery", "rbf:sigma=0.5,x=1"] {
            assert!(Kernel::parse(bad).is_err(), "{bad} should fail");
        }
    }

    fn two_point_dataset() -> Dataset {
        Dataset::from_rows(
            &["x1", "x2"],
            &[vec![0.0, 0.0], vec![2.0, 2.0]],
            Some(("y", vec!["neg".into(), "pos".into()])),
        )
        .unwrap()
    }

    #[test]
    fn two_point_dual_solved_exactly() {
        let m = svm_fit(&two_point_dataset(), 1e6, Kernel::Linear, 1e-3, 5).unwrap();
        // hand solution: α₁ = α₂ = 1/4, w = (1/2, 1/2), b = −1
        let diag = m.diagnostics.as_ref().unwrap();
        assert_relative_eq!(diag.full_alphas[0], 0.25, epsilon = 1e-12);
        assert_relative_eq!(diag.full_alphas[1], 0.25, epsilon = 1e-12);
        assert_relative_eq!(m.bias, -1.0, epsilon = 1e-9);
        assert_eq!(m.support_rows.len(), 2);
        // decision boundary x₁ + x₂ = 2
        assert_relative_eq!(decision_function(&m, &[1.0, 1.0]).unwrap(), 0.0, epsilon = 1e-9);
        assert_relative_eq!(decision_function(&m, &[2.0, 2.0]).unwrap(), 1.0, epsilon = 1e-9);
        assert_eq!(svm_predict(&m, &[3.0, 3.0]).unwrap(), "pos");
        assert_eq!(svm_predict(&m, &[0.0, 1.0]).unwrap(), "neg");
    }

    #[test]
    fn duplicated_points_margin_equals_gap() {
        // each class is one location duplicated; gap between locations is 2
        let d = Dataset::from_rows(
            &["x"],
            &[vec![0.0], vec![0.0], vec![2.0], vec![2.0]],
            Some(("y", vec!["a".into(), "a".into(), "b".into(), "b".into()])),
        )
        .unwrap();
        let m = svm_fit(&d, 1e6, Kernel::Linear, 1e-3, 5).unwrap();
        // w = Σ αᵢyᵢxᵢ for the linear kernel; margin γ = 2/‖w‖
        let w: f64 = m
            .support_rows
            .iter()
            .zip(&m.support_labels)
            .zip(&m.alphas)
            .map(|((row, &y), &a)| a * y * row[0])
            .sum();
        assert_relative_eq!(2.0 / w.abs(), 2.0, epsilon = 1e-6);
    }

    #[test]
    fn alpha_sum_constraint_and_bounds() {
        let d = two_point_dataset();
        let m = svm_fit(&d, 10.0, Kernel::Linear, 1e-3, 5).unwrap();
        let diag = m.diagnostics.as_ref().unwrap();
        let sum: f64 = diag.full_alphas[0] - diag.full_alphas[1];
        assert!(sum.abs() <= 1e-6);
        assert!(diag.full_alphas.iter().all(|&a| (0.0..=10.0).contains(&a)));
    }

    #[test]
    fn not_binary_rejected() {
        let d = Dataset::from_rows(
            &["x"],
            &[vec![0.0], vec![1.0], vec![2.0]],
            Some(("y", vec!["a".into(), "b".into(), "c".into()])),
        )
        .unwrap();
        assert!(matches!(
            svm_fit(&d, 1.0, Kernel::Linear, 1e-3, 5),
            Err(SvmError::NotBinary(3))
        ));
    }

    #[test]
    fn far_rbf_query_decays_to_bias() {
        let d = two_point_dataset();
        let m = svm_fit(&d, 10.0, Kernel::Rbf { sigma: 0.5 }, 1e-3, 5).unwrap();
        let far = decision_function(&m, &[500.0, -500.0]).unwrap();
        assert_relative_eq!(far, m.bias, epsilon = 1e-9);
    }

    proptest! {
        // Gram matrices of linear/poly/rbf kernels are PSD; sigmoid is
        // exempt (known indefinite).
        #[test]
        fn gram_matrices_positive_semidefinite(
            rows in proptest::collection::vec(
                proptest::collection::vec(-3.0f64..3.0, 3), 2..6),
            which in 0usize..3,
        ) {
            let kernel = match which {
                0 => Kernel::Linear,
                1 => Kernel::Polynomial { degree: 2 },
                _ => Kernel::Rbf { sigma: 1.0 },
            };
            let n = rows.len();
            let mut gram = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    gram[i][j] = kernel.eval(&rows[i], &rows[j]).unwrap();
                }
            }
            let (eigenvalues, _) = crate::linalg::jacobi_eigen(&gram, 1e-12);
            for lambda in eigenvalues {
                prop_assert!(lambda >= -1e-8, "negative eigenvalue {lambda}");
            }
        }
    }
}
