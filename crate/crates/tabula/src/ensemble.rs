//! Bagging with out-of-bag error and AdaBoost over the supervised base
//! learners.
//!
//! Bagging members train on independent seeded bootstrap resamples and
//! combine by majority vote (classification, ties to label order) or
//! mean (regression). AdaBoost follows the M1 scheme: round weights
//! βₜ = ½ln((1−εₜ)/εₜ), multiplicative example re-weighting, early stop
//! once a round is no better than chance. The stump base learner takes
//! row weights natively; any other base learner is trained on a weighted
//! bootstrap resample instead.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::model::{EstimatorSpec, FittedModel, ModelError};
use crate::rng;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("empty dataset")]
    Empty,
    #[error("T must be at least 1")]
    NoMembers,
    #[error("every row appears in every bag; out-of-bag error is undefined")]
    AllRowsInAllBags,
    #[error("adaboost needs exactly two classes, found {0}")]
    NotBinary(usize),
    #[error("first round was no better than chance (weighted error {0})")]
    NoUsefulWeakLearner(f64),
    #[error(transparent)]
    Base(#[from] Box<ModelError>),
    #[error(transparent)]
    Data(#[from] DataError),
}

fn base_err(e: ModelError) -> EnsembleError {
    EnsembleError::Base(Box::new(e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combination {
    MajorityVote,
    WeightedVote,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingModel {
    pub members: Vec<FittedModel>,
    /// in-bag row index multiset per member
    pub bags: Vec<Vec<usize>>,
    pub seed: u64,
    pub combination: Combination,
}

/// Train `t` members, each on its own bootstrap of `d`. Members train in
/// parallel; every bag is derived deterministically from `seed`.
pub fn bagging_fit(
    d: &Dataset,
    base: &EstimatorSpec,
    t: usize,
    seed: u64,
) -> Result<BaggingModel, EnsembleError> {
    use rayon::prelude::*;
    if d.n_rows() == 0 {
        return Err(EnsembleError::Empty);
    }
    if t == 0 {
        return Err(EnsembleError::NoMembers);
    }
    let combination = match d.labels() {
        Some(crate::data::Column::Numeric { .. }) => Combination::Mean,
        _ => Combination::MajorityVote,
    };
    let fitted: Vec<(FittedModel, Vec<usize>)> = (0..t)
        .into_par_iter()
        .map(|i| {
            let member_seed = rng::derive(seed, i as u64);
            let (in_bag, _) = crate::evaluation::bootstrap_indices(d.n_rows(), member_seed);
            let sample = d.take_rows(&in_bag);
            let model = base.fit(&sample, member_seed).map_err(base_err)?;
            Ok((model, in_bag))
        })
        .collect::<Result<_, EnsembleError>>()?;
    let (members, bags) = fitted.into_iter().unzip();
    Ok(BaggingModel { members, bags, seed, combination })
}

/// Majority vote over member predictions; ties fall back to label order.
pub fn bagging_predict(m: &BaggingModel, d: &Dataset) -> Result<Vec<String>, EnsembleError> {
    let all: Vec<Vec<String>> = m
        .members
        .iter()
        .map(|member| member.predict_labels(d).map_err(base_err))
        .collect::<Result<_, _>>()?;
    Ok((0..d.n_rows())
        .map(|row| vote(all.iter().map(|preds| preds[row].as_str())))
        .collect())
}

/// Mean of member regression predictions.
pub fn bagging_predict_numbers(
    m: &BaggingModel,
    d: &Dataset,
) -> Result<Vec<f64>, EnsembleError> {
    let all: Vec<Vec<f64>> = m
        .members
        .iter()
        .map(|member| member.predict_numbers(d).map_err(base_err))
        .collect::<Result<_, _>>()?;
    Ok((0..d.n_rows())
        .map(|row| all.iter().map(|p| p[row]).sum::<f64>() / all.len() as f64)
        .collect())
}

fn vote<'a>(preds: impl Iterator<Item = &'a str>) -> String {
    let mut tally: Vec<(&str, usize)> = Vec::new();
    for p in preds {
        match tally.iter_mut().find(|(l, _)| *l == p) {
            Some(entry) => entry.1 += 1,
            None => tally.push((p, 1)),
        }
    }
    tally.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    tally[0].0.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OobReport {
    /// error rate over the rows that had at least one excluding member
    pub error: f64,
    pub evaluated: usize,
    /// rows present in every bag, skipped from the estimate
    pub skipped: usize,
}

/// Out-of-bag error: each row is judged only by members whose bag never
/// drew it.
pub fn oob_error(m: &BaggingModel, d: &Dataset) -> Result<OobReport, EnsembleError> {
    let truth = d.label_strings()?;
    let in_bag_sets: Vec<std::collections::HashSet<usize>> = m
        .bags
        .iter()
        .map(|bag| bag.iter().copied().collect())
        .collect();
    let all: Vec<Vec<String>> = m
        .members
        .iter()
        .map(|member| member.predict_labels(d).map_err(base_err))
        .collect::<Result<_, _>>()?;

    let mut wrong = 0usize;
    let mut evaluated = 0usize;
    let mut skipped = 0usize;
    for row in 0..d.n_rows() {
        let voters: Vec<&str> = (0..m.members.len())
            .filter(|&t| !in_bag_sets[t].contains(&row))
            .map(|t| all[t][row].as_str())
            .collect();
        if voters.is_empty() {
            skipped += 1;
            continue;
        }
        evaluated += 1;
        if vote(voters.into_iter()) != truth[row] {
            wrong += 1;
        }
    }
    if evaluated == 0 {
        return Err(EnsembleError::AllRowsInAllBags);
    }
    Ok(OobReport { error: wrong as f64 / evaluated as f64, evaluated, skipped })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostRound {
    pub epsilon: f64,
    pub beta: f64,
    /// weighted error of this round's learner under the *updated*
    /// weights; ½ by the re-weighting identity
    pub error_after_update: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub members: Vec<FittedModel>,
    pub betas: Vec<f64>,
    pub rounds: Vec<AdaBoostRound>,
    pub class_neg: String,
    pub class_pos: String,
}

/// AdaBoost.M1 on a binary dataset. The lexicographically smaller label
/// maps to −1.
pub fn adaboost_fit(
    d: &Dataset,
    base: &EstimatorSpec,
    t: usize,
) -> Result<AdaBoostModel, EnsembleError> {
    if d.n_rows() == 0 {
        return Err(EnsembleError::Empty);
    }
    if t == 0 {
        return Err(EnsembleError::NoMembers);
    }
    let labels = d.label_strings()?;
    let classes = d.classes()?;
    if classes.len() != 2 {
        return Err(EnsembleError::NotBinary(classes.len()));
    }
    let y: Vec<f64> = labels
        .iter()
        .map(|l| if l == &classes[1] { 1.0 } else { -1.0 })
        .collect();

    let n = d.n_rows();
    let mut weights = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut betas = Vec::new();
    let mut rounds = Vec::new();

    for round in 0..t {
        let member = fit_weighted(d, base, &weights, round as u64)?;
        let preds = member.predict_labels(d).map_err(base_err)?;
        let h: Vec<f64> = preds
            .iter()
            .map(|p| if p == &classes[1] { 1.0 } else { -1.0 })
            .collect();
        let epsilon: f64 = weights
            .iter()
            .zip(&h)
            .zip(&y)
            .filter(|((_, hi), yi)| hi != yi)
            .map(|((w, _), _)| w)
            .sum();

        if epsilon >= 0.5 {
            if round == 0 {
                return Err(EnsembleError::NoUsefulWeakLearner(epsilon));
            }
            break;
        }
        // ε = 0: the learner is already perfect; retain it with a large
        // finite weight and stop
        let clamped = epsilon.max(1e-10);
        let beta = 0.5 * ((1.0 - clamped) / clamped).ln();
        for ((w, hi), yi) in weights.iter_mut().zip(&h).zip(&y) {
            *w *= (-beta * yi * hi).exp();
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let error_after_update: f64 = weights
            .iter()
            .zip(&h)
            .zip(&y)
            .filter(|((_, hi), yi)| hi != yi)
            .map(|((w, _), _)| w)
            .sum();

        members.push(member);
        betas.push(beta);
        rounds.push(AdaBoostRound { epsilon, beta, error_after_update });
        if epsilon == 0.0 {
            break;
        }
    }

    Ok(AdaBoostModel {
        members,
        betas,
        rounds,
        class_neg: classes[0].clone(),
        class_pos: classes[1].clone(),
    })
}

fn fit_weighted(
    d: &Dataset,
    base: &EstimatorSpec,
    weights: &[f64],
    round: u64,
) -> Result<FittedModel, EnsembleError> {
    match base {
        // the stump consumes weights directly
        EstimatorSpec::Stump => {
            let m = crate::supervised::stump::stump_fit_weighted(d, weights)
                .map_err(|e| base_err(ModelError::from(e)))?;
            Ok(FittedModel::Stump(m))
        }
        // other learners get a weighted bootstrap resample
        _ => {
            use rand::Rng;
            let mut r = rng::seeded(rng::derive(0xADAB_0057, round));
            let cumulative: Vec<f64> = weights
                .iter()
                .scan(0.0, |acc, w| {
                    *acc += w;
                    Some(*acc)
                })
                .collect();
            let total = *cumulative.last().unwrap();
            let indices: Vec<usize> = (0..d.n_rows())
                .map(|_| {
                    let u: f64 = r.random_range(0.0..total);
                    cumulative.partition_point(|&c| c <= u).min(d.n_rows() - 1)
                })
                .collect();
            base.fit(&d.take_rows(&indices), rng::derive(0xADAB_0057, round))
                .map_err(base_err)
        }
    }
}

/// `sign(Σ βₜ hₜ(x))`, zero mapped to the positive class.
pub fn adaboost_predict(m: &AdaBoostModel, d: &Dataset) -> Result<Vec<String>, EnsembleError> {
    let all: Vec<Vec<String>> = m
        .members
        .iter()
        .map(|member| member.predict_labels(d).map_err(base_err))
        .collect::<Result<_, _>>()?;
    Ok((0..d.n_rows())
        .map(|row| {
            let score: f64 = m
                .betas
                .iter()
                .zip(&all)
                .map(|(&beta, preds)| {
                    if preds[row] == m.class_pos {
                        beta
                    } else {
                        -beta
                    }
                })
                .sum();
            if score >= 0.0 {
                m.class_pos.clone()
            } else {
                m.class_neg.clone()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn stumps_fixture() -> Dataset {
        // A, A, B, B at 0, 1, 2, 3: one threshold separates them
        Dataset::from_rows(
            &["x"],
            &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
            Some(("y", vec!["A".into(), "A".into(), "B".into(), "B".into()])),
        )
        .unwrap()
    }

    fn noisy_two_class(seed: u64, n: usize) -> Dataset {
        use rand::Rng;
        let mut r = rng::seeded(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let class = i % 2;
            let center = if class == 0 { -1.0 } else { 1.0 };
            rows.push(vec![
                center + r.random_range(-1.2..1.2),
                center + r.random_range(-1.2..1.2),
            ]);
            labels.push(if class == 0 { "neg".to_string() } else { "pos".to_string() });
        }
        Dataset::from_rows(&["x", "y"], &rows, Some(("label", labels))).unwrap()
    }

    #[test]
    fn single_member_equals_base_model() {
        let d = noisy_two_class(3, 40);
        let base = EstimatorSpec::parse("tree:max_depth=1").unwrap();
        let m = bagging_fit(&d, &base, 1, 9).unwrap();
        let direct = base.fit(&d.take_rows(&m.bags[0]), rng::derive(9, 0)).unwrap();
        assert_eq!(
            bagging_predict(&m, &d).unwrap(),
            direct.predict_labels(&d).unwrap()
        );
    }

    #[test]
    fn bagging_reproducible_and_order_invariant_vote() {
        let d = noisy_two_class(5, 60);
        let base = EstimatorSpec::parse("stump").unwrap();
        let a = bagging_fit(&d, &base, 7, 42).unwrap();
        let b = bagging_fit(&d, &base, 7, 42).unwrap();
        assert_eq!(bagging_predict(&a, &d).unwrap(), bagging_predict(&b, &d).unwrap());
        assert_eq!(
            oob_error(&a, &d).unwrap().error,
            oob_error(&b, &d).unwrap().error
        );
        // permuting member order leaves the vote unchanged
        let mut permuted = a.clone();
        permuted.members.rotate_left(3);
        permuted.bags.rotate_left(3);
        assert_eq!(
            bagging_predict(&a, &d).unwrap(),
            bagging_predict(&permuted, &d).unwrap()
        );
    }

    #[test]
    fn oob_coverage_near_complete_for_many_members() {
        let d = noisy_two_class(11, 1000);
        let base = EstimatorSpec::parse("stump").unwrap();
        let m = bagging_fit(&d, &base, 25, 1).unwrap();
        let report = oob_error(&m, &d).unwrap();
        // per-row chance of having no excluding member is ~0.632^25
        let covered = report.evaluated as f64 / d.n_rows() as f64;
        assert!((1.0 - covered).abs() < 1e-4, "coverage {covered}");
    }

    #[test]
    fn adaboost_perfect_first_round_retained_alone() {
        let d = stumps_fixture();
        let base = EstimatorSpec::parse("stump").unwrap();
        let m = adaboost_fit(&d, &base, 10).unwrap();
        assert_eq!(m.members.len(), 1);
        assert_eq!(m.rounds[0].epsilon, 0.0);
        assert!(m.betas[0] > 0.0 && m.betas[0].is_finite());
        assert_eq!(
            adaboost_predict(&m, &d).unwrap(),
            d.label_strings().unwrap()
        );
    }

    #[test]
    fn adaboost_reweighting_identity() {
        // interleaved labels force several imperfect rounds
        let d = Dataset::from_rows(
            &["x"],
            &(0..8).map(|i| vec![i as f64]).collect::<Vec<_>>(),
            Some((
                "y",
                vec![
                    "A".into(),
                    "B".into(),
                    "A".into(),
                    "B".into(),
                    "A".into(),
                    "B".into(),
                    "A".into(),
                    "B".into(),
                ],
            )),
        )
        .unwrap();
        let base = EstimatorSpec::parse("stump").unwrap();
        let m = adaboost_fit(&d, &base, 12).unwrap();
        assert!(!m.rounds.is_empty());
        for round in &m.rounds {
            if round.epsilon > 0.0 {
                assert_relative_eq!(round.error_after_update, 0.5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn adaboost_requires_binary_labels() {
        let d = Dataset::from_rows(
            &["x"],
            &[vec![0.0], vec![1.0], vec![2.0]],
            Some(("y", vec!["a".into(), "b".into(), "c".into()])),
        )
        .unwrap();
        let base = EstimatorSpec::parse("stump").unwrap();
        assert!(matches!(
            adaboost_fit(&d, &base, 3),
            Err(EnsembleError::NotBinary(3))
        ));
    }

    #[test]
    fn regression_bagging_averages() {
        use crate::data::Column;
        let targets: Vec<f64> = (0..30).map(|i| 2.0 * i as f64 + 1.0).collect();
        let d = Dataset::from_columns(
            vec![Column::Numeric { name: "x".into(), values: (0..30).map(|i| i as f64).collect() }],
            Some(Column::Numeric { name: "y".into(), values: targets }),
        )
        .unwrap();
        let base = EstimatorSpec::parse("ols:form=simple").unwrap();
        let m = bagging_fit(&d, &base, 5, 3).unwrap();
        assert_eq!(m.combination, Combination::Mean);
        let preds = bagging_predict_numbers(&m, &d).unwrap();
        // the linear relation is exact, so every member recovers it
        assert_relative_eq!(preds[10], 21.0, epsilon = 1e-6);
    }
}
