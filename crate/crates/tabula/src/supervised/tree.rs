//! Decision tree induction by greedy divide-and-conquer.
//!
//! Numeric features split on a threshold chosen among midpoints of
//! consecutive sorted distinct values; categorical features split one
//! branch per category and are consumed once used on a path. The split
//! criterion is either information gain (entropy, base 2) or the
//! weighted Gini index. Growth stops on purity, an exhausted attribute
//! set, `max_depth`, or `min_leaf`. Post-pruning is reduced-error
//! pruning against a held-out validation set.

use serde::{Deserialize, Serialize};

use crate::data::{Column, Dataset};
use crate::supervised::SupervisedError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitCriterion {
    EntropyGain,
    GiniIndex,
}

impl SplitCriterion {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "entropy" | "entropy-gain" => Some(SplitCriterion::EntropyGain),
            "gini" | "gini-index" => Some(SplitCriterion::GiniIndex),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConfig {
    pub criterion: SplitCriterion,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { criterion: SplitCriterion::EntropyGain, max_depth: None, min_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: String,
        /// class distribution at the leaf, aligned with `TreeModel::classes`
        counts: Vec<usize>,
    },
    NumericSplit {
        feature: usize,
        threshold: f64,
        majority: String,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    CategoricalSplit {
        feature: usize,
        majority: String,
        branches: Vec<(String, TreeNode)>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PruneRecord {
    pub replaced_subtrees: usize,
    pub validation_accuracy_before: f64,
    pub validation_accuracy_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub criterion: SplitCriterion,
    pub feature_names: Vec<String>,
    pub classes: Vec<String>,
    pub root: TreeNode,
    pub pruning: Option<PruneRecord>,
}

/// Shannon entropy in bits of a class-count vector.
pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// `1 − Σ pₖ²`.
pub fn gini(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total as f64;
            p * p
        })
        .sum::<f64>()
}

fn impurity(criterion: SplitCriterion, counts: &[usize]) -> f64 {
    match criterion {
        SplitCriterion::EntropyGain => entropy(counts),
        SplitCriterion::GiniIndex => gini(counts),
    }
}

struct Grower<'a> {
    d: &'a Dataset,
    labels: Vec<String>,
    classes: Vec<String>,
    config: &'a TreeConfig,
}

impl Grower<'_> {
    fn class_counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0usize; self.classes.len()];
        for &i in rows {
            let c = self.classes.iter().position(|c| c == &self.labels[i]).unwrap();
            counts[c] += 1;
        }
        counts
    }

    fn majority(&self, counts: &[usize]) -> String {
        let best = counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        self.classes[best].clone()
    }

    fn grow(&self, rows: &[usize], depth: usize, available: &[bool]) -> TreeNode {
        let counts = self.class_counts(rows);
        let majority = self.majority(&counts);
        let parent_impurity = impurity(self.config.criterion, &counts);

        let depth_cap = self.config.max_depth.is_some_and(|d| depth >= d);
        if parent_impurity == 0.0 || depth_cap {
            return TreeNode::Leaf { label: majority, counts };
        }

        match self.best_split(rows, parent_impurity, available) {
            None => TreeNode::Leaf { label: majority, counts },
            Some(Split::Numeric { feature, threshold, left, right }) => TreeNode::NumericSplit {
                feature,
                threshold,
                majority,
                left: Box::new(self.grow(&left, depth + 1, available)),
                right: Box::new(self.grow(&right, depth + 1, available)),
            },
            Some(Split::Categorical { feature, groups }) => {
                let mut remaining = available.to_vec();
                remaining[feature] = false;
                TreeNode::CategoricalSplit {
                    feature,
                    majority,
                    branches: groups
                        .into_iter()
                        .map(|(cat, members)| (cat, self.grow(&members, depth + 1, &remaining)))
                        .collect(),
                }
            }
        }
    }

    fn best_split(
        &self,
        rows: &[usize],
        parent_impurity: f64,
        available: &[bool],
    ) -> Option<Split> {
        let n = rows.len() as f64;
        let mut best: Option<(f64, Split)> = None;
        let mut consider = |gain: f64, split: Split| {
            if gain > 1e-12 && best.as_ref().map_or(true, |(g, _)| gain > *g) {
                best = Some((gain, split));
            }
        };

        for (j, col) in self.d.columns().iter().enumerate() {
            match col {
                Column::Numeric { values, .. } => {
                    let mut sorted: Vec<usize> = rows.to_vec();
                    sorted.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                    for w in 0..sorted.len().saturating_sub(1) {
                        let (lo, hi) = (values[sorted[w]], values[sorted[w + 1]]);
                        if lo == hi {
                            continue;
                        }
                        let threshold = (lo + hi) / 2.0;
                        let (left, right): (Vec<usize>, Vec<usize>) =
                            rows.iter().partition(|&&i| values[i] <= threshold);
                        if left.len() < self.config.min_leaf || right.len() < self.config.min_leaf
                        {
                            continue;
                        }
                        let child = (left.len() as f64 / n)
                            * impurity(self.config.criterion, &self.class_counts(&left))
                            + (right.len() as f64 / n)
                                * impurity(self.config.criterion, &self.class_counts(&right));
                        consider(
                            parent_impurity - child,
                            Split::Numeric { feature: j, threshold, left, right },
                        );
                    }
                }
                Column::Categorical { values, .. } => {
                    if !available[j] {
                        continue;
                    }
                    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
                    for &i in rows {
                        match groups.iter_mut().find(|(cat, _)| cat == &values[i]) {
                            Some((_, members)) => members.push(i),
                            None => groups.push((values[i].clone(), vec![i])),
                        }
                    }
                    groups.sort_by(|a, b| a.0.cmp(&b.0));
                    if groups.len() < 2
                        || groups.iter().any(|(_, m)| m.len() < self.config.min_leaf)
                    {
                        continue;
                    }
                    let child: f64 = groups
                        .iter()
                        .map(|(_, members)| {
                            (members.len() as f64 / n)
                                * impurity(self.config.criterion, &self.class_counts(members))
                        })
                        .sum();
                    consider(parent_impurity - child, Split::Categorical { feature: j, groups });
                }
            }
        }
        best.map(|(_, s)| s)
    }
}

enum Split {
    Numeric { feature: usize, threshold: f64, left: Vec<usize>, right: Vec<usize> },
    Categorical { feature: usize, groups: Vec<(String, Vec<usize>)> },
}

/// Grow a tree; with `post_prune`, afterwards replace any subtree whose
/// removal does not decrease accuracy on `validation`.
pub fn tree_fit(
    d: &Dataset,
    config: &TreeConfig,
    post_prune: bool,
    validation: Option<&Dataset>,
) -> Result<TreeModel, SupervisedError> {
    if d.n_rows() == 0 {
        return Err(SupervisedError::EmptyDataset);
    }
    let grower = Grower {
        d,
        labels: d.label_strings()?,
        classes: d.classes()?,
        config,
    };
    let rows: Vec<usize> = (0..d.n_rows()).collect();
    let available = vec![true; d.n_features()];
    let root = grower.grow(&rows, 0, &available);
    let mut model = TreeModel {
        criterion: config.criterion,
        feature_names: d.feature_names().iter().map(|s| s.to_string()).collect(),
        classes: grower.classes,
        root,
        pruning: None,
    };
    if post_prune {
        let validation = validation.ok_or(SupervisedError::ValidationRequiredForPostPrune)?;
        model.pruning = Some(reduced_error_prune(&mut model, validation)?);
    }
    Ok(model)
}

fn validation_accuracy(model: &TreeModel, validation: &Dataset) -> Result<f64, SupervisedError> {
    let truth = validation.label_strings()?;
    let pred = tree_predict(model, validation)?;
    let correct = truth.iter().zip(&pred).filter(|(t, p)| t == p).count();
    Ok(correct as f64 / truth.len() as f64)
}

/// Bottom-up reduced-error pruning: visit internal nodes post-order and
/// replace a subtree by its majority leaf whenever validation accuracy
/// does not decrease.
fn reduced_error_prune(
    model: &mut TreeModel,
    validation: &Dataset,
) -> Result<PruneRecord, SupervisedError> {
    let before = validation_accuracy(model, validation)?;
    let mut replaced = 0usize;
    // Walk by path so the borrow on the tree is released between edits.
    let mut paths = Vec::new();
    collect_internal_paths(&model.root, &mut Vec::new(), &mut paths);
    // post-order: deepest first
    paths.sort_by_key(|p| std::cmp::Reverse(p.len()));
    for path in paths {
        let Some(candidate) = leaf_replacement(node_at(&model.root, &path)) else {
            continue;
        };
        let current = validation_accuracy(model, validation)?;
        let saved = std::mem::replace(node_at_mut(&mut model.root, &path), candidate);
        let pruned = validation_accuracy(model, validation)?;
        if pruned >= current {
            replaced += 1;
        } else {
            *node_at_mut(&mut model.root, &path) = saved;
        }
    }
    let after = validation_accuracy(model, validation)?;
    Ok(PruneRecord {
        replaced_subtrees: replaced,
        validation_accuracy_before: before,
        validation_accuracy_after: after,
    })
}

fn collect_internal_paths(node: &TreeNode, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    match node {
        TreeNode::Leaf { .. } => {}
        TreeNode::NumericSplit { left, right, .. } => {
            out.push(path.clone());
            path.push(0);
            collect_internal_paths(left, path, out);
            path.pop();
            path.push(1);
            collect_internal_paths(right, path, out);
            path.pop();
        }
        TreeNode::CategoricalSplit { branches, .. } => {
            out.push(path.clone());
            for (i, (_, child)) in branches.iter().enumerate() {
                path.push(i);
                collect_internal_paths(child, path, out);
                path.pop();
            }
        }
    }
}

fn node_at<'a>(mut node: &'a TreeNode, path: &[usize]) -> &'a TreeNode {
    for &step in path {
        node = match node {
            TreeNode::NumericSplit { left, right, .. } => {
                if step == 0 {
                    left
                } else {
                    right
                }
            }
            TreeNode::CategoricalSplit { branches, .. } => &branches[step].1,
            TreeNode::Leaf { .. } => unreachable!("path descends through a leaf"),
        };
    }
    node
}

fn node_at_mut<'a>(mut node: &'a mut TreeNode, path: &[usize]) -> &'a mut TreeNode {
    for &step in path {
        node = match node {
            TreeNode::NumericSplit { left, right, .. } => {
                if step == 0 {
                    left
                } else {
                    right
                }
            }
            TreeNode::CategoricalSplit { branches, .. } => &mut branches[step].1,
            TreeNode::Leaf { .. } => unreachable!("path descends through a leaf"),
        };
    }
    node
}

/// Majority leaf that would replace `node`, with class counts summed
/// over its leaves.
fn leaf_replacement(node: &TreeNode) -> Option<TreeNode> {
    match node {
        TreeNode::Leaf { .. } => None,
        _ => {
            let mut counts: Option<Vec<usize>> = None;
            sum_leaf_counts(node, &mut counts);
            let counts = counts?;
            let majority = match node {
                TreeNode::NumericSplit { majority, .. }
                | TreeNode::CategoricalSplit { majority, .. } => majority.clone(),
                TreeNode::Leaf { .. } => unreachable!(),
            };
            Some(TreeNode::Leaf { label: majority, counts })
        }
    }
}

fn sum_leaf_counts(node: &TreeNode, acc: &mut Option<Vec<usize>>) {
    match node {
        TreeNode::Leaf { counts, .. } => match acc {
            Some(total) => {
                for (t, c) in total.iter_mut().zip(counts) {
                    *t += c;
                }
            }
            None => *acc = Some(counts.clone()),
        },
        TreeNode::NumericSplit { left, right, .. } => {
            sum_leaf_counts(left, acc);
            sum_leaf_counts(right, acc);
        }
        TreeNode::CategoricalSplit { branches, .. } => {
            for (_, child) in branches {
                sum_leaf_counts(child, acc);
            }
        }
    }
}

pub fn tree_predict(m: &TreeModel, d: &Dataset) -> Result<Vec<String>, SupervisedError> {
    (0..d.n_rows()).map(|i| predict_row(m, d, i)).collect()
}

fn predict_row(m: &TreeModel, d: &Dataset, row: usize) -> Result<String, SupervisedError> {
    let mut node = &m.root;
    loop {
        match node {
            TreeNode::Leaf { label, .. } => return Ok(label.clone()),
            TreeNode::NumericSplit { feature, threshold, left, right, .. } => {
                let value = numeric_value(m, d, *feature, row)?;
                node = if value <= *threshold { left } else { right };
            }
            TreeNode::CategoricalSplit { feature, majority, branches } => {
                let value = categorical_value(m, d, *feature, row)?;
                match branches.iter().find(|(cat, _)| cat == value) {
                    Some((_, child)) => node = child,
                    // category unseen at this node: fall back to majority
                    None => return Ok(majority.clone()),
                }
            }
        }
    }
}

fn numeric_value<'a>(
    m: &TreeModel,
    d: &'a Dataset,
    feature: usize,
    row: usize,
) -> Result<f64, SupervisedError> {
    let name = &m.feature_names[feature];
    match d.column(name) {
        Some(Column::Numeric { values, .. }) => Ok(values[row]),
        _ => Err(SupervisedError::Data(crate::data::DataError::NonNumericFeature(name.clone()))),
    }
}

fn categorical_value<'a>(
    m: &TreeModel,
    d: &'a Dataset,
    feature: usize,
    row: usize,
) -> Result<&'a str, SupervisedError> {
    let name = &m.feature_names[feature];
    match d.column(name) {
        Some(Column::Categorical { values, .. }) => Ok(&values[row]),
        _ => Err(SupervisedError::Data(crate::data::DataError::LabelColumnNotFound(name.clone()))),
    }
}

/// Indented ASCII rendering in the style of printed tree exports.
pub fn tree_export_text(m: &TreeModel) -> String {
    let mut out = String::new();
    render(m, &m.root, 0, &mut out);
    out
}

fn render(m: &TreeModel, node: &TreeNode, depth: usize, out: &mut String) {
    let prefix = "|   ".repeat(depth);
    match node {
        TreeNode::Leaf { label, .. } => {
            out.push_str(&format!("{prefix}|--- class: {label}\n"));
        }
        TreeNode::NumericSplit { feature, threshold, left, right, .. } => {
            let name = &m.feature_names[*feature];
            out.push_str(&format!("{prefix}|--- {name} <= {threshold:.2}\n"));
            render(m, left, depth + 1, out);
            out.push_str(&format!("{prefix}|--- {name} >  {threshold:.2}\n"));
            render(m, right, depth + 1, out);
        }
        TreeNode::CategoricalSplit { feature, branches, .. } => {
            let name = &m.feature_names[*feature];
            for (cat, child) in branches {
                out.push_str(&format!("{prefix}|--- {name} == {cat}\n"));
                render(m, child, depth + 1, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn watermelon() -> Dataset {
        let csv = include_str!("../../tests/data/watermelon61.csv");
        Dataset::from_csv_str(csv, Some("ripe")).unwrap()
    }

    #[test]
    fn impurity_known_values() {
        assert_eq!(entropy(&[4, 0]), 0.0);
        assert_eq!(gini(&[4, 0]), 0.0);
        assert_relative_eq!(entropy(&[5, 5]), 1.0);
        assert_relative_eq!(gini(&[5, 5]), 0.5);
        // watermelon root: 8 ripe / 9 unripe
        assert_relative_eq!(entropy(&[8, 9]), 0.9975025463691152, epsilon = 1e-12);
    }

    #[test]
    fn pure_node_becomes_leaf() {
        let d = Dataset::from_rows(
            &["x"],
            &[vec![0.0], vec![1.0], vec![2.0]],
            Some(("y", vec!["a".into(), "a".into(), "a".into()])),
        )
        .unwrap();
        let m = tree_fit(&d, &TreeConfig::default(), false, None).unwrap();
        assert!(matches!(m.root, TreeNode::Leaf { .. }));
    }

    #[test]
    fn full_growth_reproduces_training_labels() {
        let d = watermelon();
        for criterion in [SplitCriterion::EntropyGain, SplitCriterion::GiniIndex] {
            let config = TreeConfig { criterion, ..TreeConfig::default() };
            let m = tree_fit(&d, &config, false, None).unwrap();
            assert_eq!(tree_predict(&m, &d).unwrap(), d.label_strings().unwrap());
        }
    }

    #[test]
    fn max_depth_limits_tree() {
        let d = watermelon();
        let config = TreeConfig { max_depth: Some(1), ..TreeConfig::default() };
        let m = tree_fit(&d, &config, false, None).unwrap();
        fn depth(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::NumericSplit { left, right, .. } => {
                    1 + depth(left).max(depth(right))
                }
                TreeNode::CategoricalSplit { branches, .. } => {
                    1 + branches.iter().map(|(_, c)| depth(c)).max().unwrap_or(0)
                }
            }
        }
        assert!(depth(&m.root) <= 1);
    }

    #[test]
    fn executed_splits_never_hurt_impurity() {
        let d = watermelon();
        let m = tree_fit(&d, &TreeConfig::default(), false, None).unwrap();
        fn check(model: &TreeModel, node: &TreeNode) {
            let mut parent = None;
            sum_leaf_counts(node, &mut parent);
            let parent = parent.unwrap();
            let parent_total: usize = parent.iter().sum();
            let parent_imp = impurity(model.criterion, &parent);
            let children: Vec<&TreeNode> = match node {
                TreeNode::Leaf { .. } => return,
                TreeNode::NumericSplit { left, right, .. } => vec![left, right],
                TreeNode::CategoricalSplit { branches, .. } => {
                    branches.iter().map(|(_, c)| c).collect()
                }
            };
            let mut weighted = 0.0;
            for child in &children {
                let mut counts = None;
                sum_leaf_counts(child, &mut counts);
                let counts = counts.unwrap();
                let total: usize = counts.iter().sum();
                weighted += (total as f64 / parent_total as f64)
                    * impurity(model.criterion, &counts);
            }
            assert!(weighted <= parent_imp + 1e-12);
            for child in children {
                check(model, child);
            }
        }
        check(&m, &m.root);
    }

    #[test]
    fn post_prune_requires_validation() {
        let d = watermelon();
        assert!(matches!(
            tree_fit(&d, &TreeConfig::default(), true, None),
            Err(SupervisedError::ValidationRequiredForPostPrune)
        ));
    }

    #[test]
    fn post_prune_never_hurts_validation_accuracy() {
        let d = watermelon();
        let (train, val) = crate::data::train_test_split(&d, 0.4, 5, false).unwrap();
        let m = tree_fit(&train, &TreeConfig::default(), true, Some(&val)).unwrap();
        let record = m.pruning.unwrap();
        assert!(record.validation_accuracy_after >= record.validation_accuracy_before);
    }

    #[test]
    fn export_text_shape() {
        let d = Dataset::from_rows(
            &["f0"],
            &[vec![0.0], vec![1.0]],
            Some(("y", vec!["a".into(), "b".into()])),
        )
        .unwrap();
        let m = tree_fit(&d, &TreeConfig::default(), false, None).unwrap();
        let text = tree_export_text(&m);
        assert_eq!(
            text,
            "|--- f0 <= 0.50\n|   |--- class: a\n|--- f0 >  0.50\n|   |--- class: b\n"
        );
    }

    #[test]
    fn empty_dataset_rejected() {
        let d = Dataset::from_csv_str("x,y\n", Some("y")).unwrap();
        assert!(matches!(
            tree_fit(&d, &TreeConfig::default(), false, None),
            Err(SupervisedError::EmptyDataset)
        ));
    }
}
