//! Naive Bayes classification over mixed feature types.
//!
//! Categorical features get conditional frequency tables with a Laplace
//! pseudo-count `alpha` (default 1, guarding against the zero-frequency
//! problem); numeric features get class-conditional Gaussian densities
//! estimated with the sample (n−1) variance. Scores are log-space:
//! `score(c) = ln P(c) + Σ ln p(x_j | c)`.

use serde::{Deserialize, Serialize};

use crate::data::{Column, Dataset};
use crate::supervised::SupervisedError;

/// Standard-deviation floor preventing the Gaussian density from
/// dividing by zero on constant features.
pub const SIGMA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NbFeature {
    Categorical {
        name: String,
        categories: Vec<String>,
        /// cond[class][category] = P(category | class); each class row
        /// sums to 1 over the seen categories.
        cond: Vec<Vec<f64>>,
        /// P assigned to a category unseen in training (per class);
        /// `None` when alpha = 0, in which case prediction errors out.
        unseen: Option<Vec<f64>>,
    },
    Gaussian {
        name: String,
        mean: Vec<f64>,
        sd: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub classes: Vec<String>,
    pub priors: Vec<f64>,
    pub alpha: f64,
    pub features: Vec<NbFeature>,
}

pub fn nb_fit(d: &Dataset, alpha: f64) -> Result<NaiveBayesModel, SupervisedError> {
    if d.n_rows() == 0 {
        return Err(SupervisedError::EmptyDataset);
    }
    let labels = d.label_strings()?;
    let classes = d.classes()?;
    let class_rows: Vec<Vec<usize>> = classes
        .iter()
        .map(|c| (0..d.n_rows()).filter(|&i| &labels[i] == c).collect())
        .collect();
    let priors: Vec<f64> = class_rows
        .iter()
        .map(|rows| rows.len() as f64 / d.n_rows() as f64)
        .collect();

    let features = d
        .columns()
        .iter()
        .map(|col| match col {
            Column::Categorical { name, values } => {
                let mut categories: Vec<String> = values.clone();
                categories.sort();
                categories.dedup();
                let cond: Vec<Vec<f64>> = class_rows
                    .iter()
                    .map(|rows| {
                        let n_c = rows.len() as f64;
                        let v = categories.len() as f64;
                        categories
                            .iter()
                            .map(|cat| {
                                let count =
                                    rows.iter().filter(|&&i| &values[i] == cat).count() as f64;
                                (count + alpha) / (n_c + alpha * v)
                            })
                            .collect()
                    })
                    .collect();
                let unseen = (alpha > 0.0).then(|| {
                    class_rows
                        .iter()
                        .map(|rows| {
                            alpha / (rows.len() as f64 + alpha * categories.len() as f64)
                        })
                        .collect()
                });
                NbFeature::Categorical { name: name.clone(), categories, cond, unseen }
            }
            Column::Numeric { name, values } => {
                let mut mean = Vec::with_capacity(classes.len());
                let mut sd = Vec::with_capacity(classes.len());
                for rows in &class_rows {
                    let n = rows.len() as f64;
                    let mu = rows.iter().map(|&i| values[i]).sum::<f64>() / n;
                    let var = if rows.len() > 1 {
                        rows.iter().map(|&i| (values[i] - mu).powi(2)).sum::<f64>() / (n - 1.0)
                    } else {
                        0.0
                    };
                    mean.push(mu);
                    sd.push(var.sqrt().max(SIGMA_FLOOR));
                }
                NbFeature::Gaussian { name: name.clone(), mean, sd }
            }
        })
        .collect();

    Ok(NaiveBayesModel { classes, priors, alpha, features })
}

/// Per-class log scores for every row of `d`, in class order.
pub fn nb_score(m: &NaiveBayesModel, d: &Dataset) -> Result<Vec<Vec<f64>>, SupervisedError> {
    (0..d.n_rows()).map(|i| score_row(m, d, i)).collect()
}

fn score_row(m: &NaiveBayesModel, d: &Dataset, row: usize) -> Result<Vec<f64>, SupervisedError> {
    let mut scores: Vec<f64> = m.priors.iter().map(|p| p.ln()).collect();
    for feature in &m.features {
        match feature {
            NbFeature::Categorical { name, categories, cond, unseen } => {
                let values = match d.column(name) {
                    Some(Column::Categorical { values, .. }) => values,
                    _ => return Err(SupervisedError::Data(
                        crate::data::DataError::LabelColumnNotFound(name.clone()),
                    )),
                };
                let value = &values[row];
                match categories.iter().position(|c| c == value) {
                    Some(cat) => {
                        for (s, class_cond) in scores.iter_mut().zip(cond) {
                            *s += class_cond[cat].ln();
                        }
                    }
                    None => match unseen {
                        Some(unseen) => {
                            for (s, p) in scores.iter_mut().zip(unseen) {
                                *s += p.ln();
                            }
                        }
                        None => {
                            return Err(SupervisedError::UnknownCategoryAtPredict {
                                feature: name.clone(),
                                value: value.clone(),
                            })
                        }
                    },
                }
            }
            NbFeature::Gaussian { name, mean, sd } => {
                let values = match d.column(name) {
                    Some(Column::Numeric { values, .. }) => values,
                    _ => return Err(SupervisedError::Data(
                        crate::data::DataError::NonNumericFeature(name.clone()),
                    )),
                };
                let x = values[row];
                for ((s, mu), sigma) in scores.iter_mut().zip(mean).zip(sd) {
                    *s += gaussian_log_density(x, *mu, *sigma);
                }
            }
        }
    }
    Ok(scores)
}

fn gaussian_log_density(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -((2.0 * std::f64::consts::PI).sqrt() * sigma).ln() - 0.5 * z * z
}

/// Argmax over class scores; ties go to the earlier class in sorted
/// label order.
pub fn nb_predict(m: &NaiveBayesModel, d: &Dataset) -> Result<Vec<String>, SupervisedError> {
    Ok(nb_score(m, d)?
        .into_iter()
        .map(|scores| {
            let best = scores
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap();
            m.classes[best].clone()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::data::Column;

    fn watermelon() -> Dataset {
        let csv = include_str!("../../tests/data/watermelon61.csv");
        Dataset::from_csv_str(csv, Some("ripe")).unwrap()
    }

    #[test]
    fn watermelon_priors() {
        let m = nb_fit(&watermelon(), 0.0).unwrap();
        assert_eq!(m.classes, vec!["false", "true"]);
        assert_relative_eq!(m.priors[1], 8.0 / 17.0, epsilon = 1e-12);
        assert_relative_eq!(m.priors[0], 9.0 / 17.0, epsilon = 1e-12);
        assert_relative_eq!(m.priors.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn conditional_rows_sum_to_one() {
        for alpha in [0.0, 1.0, 2.5] {
            let m = nb_fit(&watermelon(), alpha).unwrap();
            for f in &m.features {
                if let NbFeature::Categorical { cond, .. } = f {
                    for row in cond {
                        assert_relative_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn gaussian_stats_match_printed_values() {
        let m = nb_fit(&watermelon(), 0.0).unwrap();
        let density = m
            .features
            .iter()
            .find_map(|f| match f {
                NbFeature::Gaussian { name, mean, sd } if name == "density" => Some((mean, sd)),
                _ => None,
            })
            .unwrap();
        // class order is [false, true]
        assert_relative_eq!(density.0[1], 0.574, epsilon = 5e-4);
        assert_relative_eq!(density.1[1], 0.129, epsilon = 5e-4);
        assert_relative_eq!(density.0[0], 0.496, epsilon = 5e-4);
    }

    #[test]
    fn one_class_training_set() {
        let d = Dataset::from_rows(
            &["x"],
            &[vec![1.0], vec![2.0]],
            Some(("y", vec!["only".into(), "only".into()])),
        )
        .unwrap();
        let m = nb_fit(&d, 1.0).unwrap();
        assert_eq!(m.priors, vec![1.0]);
        assert_eq!(nb_predict(&m, &d).unwrap(), vec!["only", "only"]);
    }

    #[test]
    fn unknown_category_errors_only_without_smoothing() {
        let d = watermelon();
        let mut query_cols = Vec::new();
        for col in d.columns() {
            query_cols.push(match col {
                Column::Categorical { name, .. } => Column::Categorical {
                    name: name.clone(),
                    values: vec!["never-seen".into()],
                },
                Column::Numeric { name, .. } => {
                    Column::Numeric { name: name.clone(), values: vec![0.5] }
                }
            });
        }
        let query = Dataset::from_columns(query_cols, None).unwrap();

        let strict = nb_fit(&d, 0.0).unwrap();
        assert!(matches!(
            nb_predict(&strict, &query),
            Err(SupervisedError::UnknownCategoryAtPredict { .. })
        ));
        let smoothed = nb_fit(&d, 1.0).unwrap();
        assert!(nb_predict(&smoothed, &query).is_ok());
    }

    #[test]
    fn argmax_invariant_under_constant_shift() {
        let d = watermelon();
        let m = nb_fit(&d, 1.0).unwrap();
        let scores = nb_score(&m, &d).unwrap();
        let preds = nb_predict(&m, &d).unwrap();
        for (row_scores, pred) in scores.iter().zip(&preds) {
            let shifted: Vec<f64> = row_scores.iter().map(|s| s + 42.0).collect();
            let best = shifted
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap();
            assert_eq!(&m.classes[best], pred);
        }
    }
}
