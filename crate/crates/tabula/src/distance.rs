//! Dissimilarity functions shared by KNN, clustering, and the validity
//! indices.
//!
//! The Minkowski family covers numeric rows (`g = 1` Manhattan, `g = 2`
//! Euclidean, `g = ∞` maximum component gap); matching coefficients cover
//! binary and nominal rows. The infinite order is an explicit enum value
//! rather than a large float so no intermediate power can overflow.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistanceError {
    #[error("rows have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("minkowski order must satisfy g >= 1, got {0}")]
    OrderOutOfRange(f64),
    #[error("weight {0} is negative")]
    NegativeWeight(f64),
    #[error("entry {0} is not 0 or 1")]
    NonBinaryEntry(f64),
    #[error("unknown metric spec {0:?}")]
    UnknownSpec(String),
}

/// Minkowski exponent: a finite real `g ≥ 1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Order {
    Finite(f64),
    Infinity,
}

/// A named, parameterized dissimilarity over feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DistanceMetric {
    Minkowski { g: Order },
    WeightedMinkowski { g: Order, weights: Vec<f64> },
    SimpleMatching,
    NominalMatching,
}

impl DistanceMetric {
    pub fn euclidean() -> Self {
        DistanceMetric::Minkowski { g: Order::Finite(2.0) }
    }

    pub fn manhattan() -> Self {
        DistanceMetric::Minkowski { g: Order::Finite(1.0) }
    }

    pub fn chebyshev() -> Self {
        DistanceMetric::Minkowski { g: Order::Infinity }
    }

    /// Parse a CLI metric string: `euclidean`, `manhattan`, `chebyshev`,
    /// or `minkowski:g=<real>`.
    pub fn parse(spec: &str) -> Result<Self, DistanceError> {
        match spec {
            "euclidean" => return Ok(Self::euclidean()),
            "manhattan" => return Ok(Self::manhattan()),
            "chebyshev" => return Ok(Self::chebyshev()),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("minkowski:g=") {
            if rest == "inf" {
                return Ok(DistanceMetric::Minkowski { g: Order::Infinity });
            }
            let g: f64 = rest
                .parse()
                .map_err(|_| DistanceError::UnknownSpec(spec.to_string()))?;
            if !(g >= 1.0) {
                return Err(DistanceError::OrderOutOfRange(g));
            }
            return Ok(DistanceMetric::Minkowski { g: Order::Finite(g) });
        }
        Err(DistanceError::UnknownSpec(spec.to_string()))
    }

    /// Evaluate over numeric rows. `NominalMatching` is rejected here;
    /// use [`nominal_matching`] on categorical rows instead.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, DistanceError> {
        match self {
            DistanceMetric::Minkowski { g } => minkowski(x, y, *g),
            DistanceMetric::WeightedMinkowski { g, weights } => {
                weighted_minkowski(x, y, *g, weights)
            }
            DistanceMetric::SimpleMatching => simple_matching(x, y),
            DistanceMetric::NominalMatching => {
                Err(DistanceError::UnknownSpec("nominal-matching on numeric rows".into()))
            }
        }
    }
}

fn check_lengths(x: usize, y: usize) -> Result<(), DistanceError> {
    if x != y {
        return Err(DistanceError::LengthMismatch(x, y));
    }
    Ok(())
}

/// `(Σ |xᵢ − yᵢ|^g)^(1/g)`; `g = ∞` gives the maximum component gap.
pub fn minkowski(x: &[f64], y: &[f64], g: Order) -> Result<f64, DistanceError> {
    check_lengths(x.len(), y.len())?;
    match g {
        Order::Infinity => Ok(x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)),
        Order::Finite(g) => {
            if !(g >= 1.0) {
                return Err(DistanceError::OrderOutOfRange(g));
            }
            let sum: f64 = x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(g)).sum();
            Ok(sum.powf(1.0 / g))
        }
    }
}

/// `(Σ wᵢ |xᵢ − yᵢ|^g)^(1/g)` with non-negative weights; all-ones weights
/// reduce to [`minkowski`].
pub fn weighted_minkowski(
    x: &[f64],
    y: &[f64],
    g: Order,
    w: &[f64],
) -> Result<f64, DistanceError> {
    check_lengths(x.len(), y.len())?;
    check_lengths(x.len(), w.len())?;
    if let Some(&bad) = w.iter().find(|&&wi| wi < 0.0) {
        return Err(DistanceError::NegativeWeight(bad));
    }
    match g {
        Order::Infinity => Ok(x
            .iter()
            .zip(y)
            .zip(w)
            .map(|((a, b), wi)| wi * (a - b).abs())
            .fold(0.0, f64::max)),
        Order::Finite(g) => {
            if !(g >= 1.0) {
                return Err(DistanceError::OrderOutOfRange(g));
            }
            let sum: f64 = x
                .iter()
                .zip(y)
                .zip(w)
                .map(|((a, b), wi)| wi * (a - b).abs().powf(g))
                .sum();
            Ok(sum.powf(1.0 / g))
        }
    }
}

/// Simple matching distance over 0/1 rows: mismatches over length,
/// i.e. `(r + s)/(q + r + s + t)` in contingency-table terms.
pub fn simple_matching(x: &[f64], y: &[f64]) -> Result<f64, DistanceError> {
    check_lengths(x.len(), y.len())?;
    for &v in x.iter().chain(y) {
        if v != 0.0 && v != 1.0 {
            return Err(DistanceError::NonBinaryEntry(v));
        }
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let mismatches = x.iter().zip(y).filter(|(a, b)| a != b).count();
    Ok(mismatches as f64 / x.len() as f64)
}

/// Nominal matching distance: `(p − m)/p`, the fraction of positions with
/// unequal categories.
pub fn nominal_matching(x: &[&str], y: &[&str]) -> Result<f64, DistanceError> {
    check_lengths(x.len(), y.len())?;
    if x.is_empty() {
        return Ok(0.0);
    }
    let mismatches = x.iter().zip(y).filter(|(a, b)| a != b).count();
    Ok(mismatches as f64 / x.len() as f64)
}
