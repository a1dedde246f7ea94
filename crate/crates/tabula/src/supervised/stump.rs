//! Weighted decision stump: a depth-one threshold classifier that
//! minimizes weighted training error. Natively supports row weights, so
//! boosting can use it without resampling.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::supervised::SupervisedError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpModel {
    pub feature: usize,
    pub threshold: f64,
    /// label predicted when `x[feature] <= threshold`
    pub left_label: String,
    pub right_label: String,
}

/// Fit on numeric features with per-row weights. Candidate thresholds
/// are midpoints between consecutive sorted distinct values of each
/// feature, plus a degenerate all-left stump; each side predicts its
/// weighted majority label. Ties prefer the earlier candidate.
pub fn stump_fit_weighted(
    d: &Dataset,
    weights: &[f64],
) -> Result<StumpModel, SupervisedError> {
    let matrix = d.to_matrix()?;
    let labels = d.label_strings()?;
    if matrix.is_empty() {
        return Err(SupervisedError::EmptyDataset);
    }
    if weights.len() != matrix.len() {
        return Err(SupervisedError::LengthMismatch(weights.len(), matrix.len()));
    }
    let classes = d.classes()?;

    let weighted_majority = |rows: &[usize]| -> (String, f64) {
        // (majority label, its weight); empty side defaults to the first class
        let mut best = (classes[0].clone(), 0.0);
        for class in &classes {
            let w: f64 = rows
                .iter()
                .filter(|&&i| &labels[i] == class)
                .map(|&i| weights[i])
                .sum();
            if w > best.1 {
                best = (class.clone(), w);
            }
        }
        best
    };

    let evaluate = |feature: usize, threshold: f64| -> (StumpModel, f64) {
        let (left, right): (Vec<usize>, Vec<usize>) =
            (0..matrix.len()).partition(|&i| matrix[i][feature] <= threshold);
        let (left_label, _) = weighted_majority(&left);
        let (right_label, _) = weighted_majority(&right);
        let error: f64 = left
            .iter()
            .filter(|&&i| labels[i] != left_label)
            .chain(right.iter().filter(|&&i| labels[i] != right_label))
            .map(|&i| weights[i])
            .sum();
        (StumpModel { feature, threshold, left_label, right_label }, error)
    };

    let mut best = evaluate(0, f64::INFINITY);
    for feature in 0..matrix[0].len() {
        let mut values: Vec<f64> = matrix.iter().map(|r| r[feature]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let candidate = evaluate(feature, (w[0] + w[1]) / 2.0);
            if candidate.1 < best.1 {
                best = candidate;
            }
        }
    }
    Ok(best.0)
}

pub fn stump_predict(m: &StumpModel, rows: &[Vec<f64>]) -> Vec<String> {
    rows.iter()
        .map(|r| {
            if r[m.feature] <= m.threshold {
                m.left_label.clone()
            } else {
                m.right_label.clone()
            }
        })
        .collect()
}
