//! k-nearest-neighbor classification.
//!
//! A lazy learner: fitting stores the training rows verbatim and all work
//! happens at prediction time. Queries are labeled by majority vote among
//! the k nearest training rows. Ties are resolved deterministically:
//! equal distances prefer the lower training-row index, and vote ties go
//! to the label with the smaller summed distance, then to label order.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::distance::DistanceMetric;
use crate::supervised::SupervisedError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<String>,
    pub k: usize,
    pub metric: DistanceMetric,
}

pub fn knn_fit(d: &Dataset, k: usize, metric: DistanceMetric) -> Result<KnnModel, SupervisedError> {
    if k == 0 {
        return Err(SupervisedError::KZero);
    }
    let rows = d.to_matrix()?;
    if k > rows.len() {
        return Err(SupervisedError::KExceedsData { k, n: rows.len() });
    }
    let labels = d.label_strings()?;
    Ok(KnnModel { rows, labels, k, metric })
}

pub fn knn_predict(m: &KnnModel, queries: &[Vec<f64>]) -> Result<Vec<String>, SupervisedError> {
    queries.iter().map(|q| predict_one(m, q)).collect()
}

fn predict_one(m: &KnnModel, query: &[f64]) -> Result<String, SupervisedError> {
    let mut dists: Vec<(f64, usize)> = m
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| Ok((m.metric.eval(query, row)?, i)))
        .collect::<Result<_, SupervisedError>>()?;
    dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    // vote among the k nearest: (count desc, summed distance asc, label asc)
    let mut tally: Vec<(String, usize, f64)> = Vec::new();
    for &(dist, idx) in dists.iter().take(m.k) {
        let label = &m.labels[idx];
        match tally.iter_mut().find(|(l, _, _)| l == label) {
            Some(entry) => {
                entry.1 += 1;
                entry.2 += dist;
            }
            None => tally.push((label.clone(), 1, dist)),
        }
    }
    tally.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(a.2.total_cmp(&b.2))
            .then(a.0.cmp(&b.0))
    });
    Ok(tally[0].0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(rows: &[Vec<f64>], labels: &[&str], k: usize) -> KnnModel {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let d = Dataset::from_rows(&["x"], rows, Some(("y", labels))).unwrap();
        knn_fit(&d, k, DistanceMetric::euclidean()).unwrap()
    }

    #[test]
    fn exact_match_wins_at_k1() {
        let m = fit(&[vec![0.0], vec![1.0], vec![10.0]], &["A", "A", "B"], 1);
        assert_eq!(knn_predict(&m, &[vec![10.0]]).unwrap(), vec!["B"]);
    }

    #[test]
    fn majority_among_three() {
        let m = fit(&[vec![0.0], vec![1.0], vec![10.0]], &["A", "A", "B"], 3);
        assert_eq!(knn_predict(&m, &[vec![0.4]]).unwrap(), vec!["A"]);
    }

    #[test]
    fn vote_tie_broken_by_summed_distance() {
        // query 0.9: B at 1.0 and 1.3 (sum 2.3), A at 0.9 and 2.9 (sum 3.8)
        let m = fit(
            &[vec![0.0], vec![3.8], vec![1.9], vec![2.2]],
            &["A", "A", "B", "B"],
            4,
        );
        assert_eq!(knn_predict(&m, &[vec![0.9]]).unwrap(), vec!["B"]);
    }

    #[test]
    fn vote_and_distance_tie_falls_to_label_order() {
        let m = fit(&[vec![-1.0], vec![1.0]], &["B", "A"], 2);
        assert_eq!(knn_predict(&m, &[vec![0.0]]).unwrap(), vec!["A"]);
    }

    #[test]
    fn k_guards() {
        let labels: Vec<String> = vec!["A".into(), "B".into()];
        let d = Dataset::from_rows(&["x"], &[vec![0.0], vec![1.0]], Some(("y", labels))).unwrap();
        assert!(matches!(
            knn_fit(&d, 3, DistanceMetric::euclidean()),
            Err(SupervisedError::KExceedsData { k: 3, n: 2 })
        ));
        assert!(matches!(
            knn_fit(&d, 0, DistanceMetric::euclidean()),
            Err(SupervisedError::KZero)
        ));
    }

    #[test]
    fn k1_zero_training_error_on_distinct_rows() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let labels: Vec<String> = (0..12).map(|i| format!("c{}", i % 3)).collect();
        let d = Dataset::from_rows(&["a", "b"], &rows, Some(("y", labels.clone()))).unwrap();
        let m = knn_fit(&d, 1, DistanceMetric::euclidean()).unwrap();
        assert_eq!(knn_predict(&m, &rows).unwrap(), labels);
    }
}
