//! Hierarchical clustering over a pairwise distance matrix:
//! agglomerative merging under single/complete/average linkage, and the
//! divisive DIANA algorithm.
//!
//! Both produce a stepwise [`Dendrogram`]: leaves are row indices
//! `0..n`, each step merges two prior nodes into node `n + step`, and
//! the step height is the merge distance (agglomerative) or the split
//! cluster's diameter (DIANA).

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linkage {
    /// d_min: nearest pair across clusters.
    Single,
    /// d_max: farthest pair across clusters.
    Complete,
    /// d_avg: mean over all cross-cluster pairs.
    Average,
}

impl Linkage {
    pub fn parse(s: &str) -> Option<Linkage> {
        match s {
            "single" => Some(Linkage::Single),
            "complete" => Some(Linkage::Complete),
            "average" => Some(Linkage::Average),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DendrogramKind {
    Agglomerative(Linkage),
    Diana,
}

/// Binary merge tree over all rows. Node ids below `n_leaves` are rows;
/// node `n_leaves + i` is created by `steps[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub steps: Vec<Step>,
    pub kind: DendrogramKind,
}

impl Dendrogram {
    /// Leaf indices under `node`, ascending.
    pub fn members(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(id) = stack.pop() {
            if id < self.n_leaves {
                out.push(id);
            } else {
                let step = &self.steps[id - self.n_leaves];
                stack.push(step.left);
                stack.push(step.right);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn root(&self) -> usize {
        self.n_leaves + self.steps.len() - 1
    }

    /// Nested `{left, right, height}` rendering; leaves are `{leaf: i}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        fn node(d: &Dendrogram, id: usize) -> serde_json::Value {
            if id < d.n_leaves {
                serde_json::json!({ "leaf": id })
            } else {
                let step = &d.steps[id - d.n_leaves];
                serde_json::json!({
                    "left": node(d, step.left),
                    "right": node(d, step.right),
                    "height": step.height,
                })
            }
        }
        node(self, self.root())
    }

    /// Newick string with row indices as leaf names and heights as
    /// internal node labels, e.g. `((2,4):2,(1,3):5):11;`.
    pub fn to_newick(&self) -> String {
        fn node(d: &Dendrogram, id: usize, out: &mut String) {
            if id < d.n_leaves {
                out.push_str(&id.to_string());
            } else {
                let step = &d.steps[id - d.n_leaves];
                out.push('(');
                node(d, step.left, out);
                out.push(',');
                node(d, step.right, out);
                out.push_str(&format!("):{}", step.height));
            }
        }
        let mut out = String::new();
        node(self, self.root(), &mut out);
        out.push(';');
        out
    }
}

fn validate_matrix(dist: &[Vec<f64>]) -> Result<usize, ClusterError> {
    let n = dist.len();
    if dist.iter().any(|row| row.len() != n) {
        return Err(ClusterError::MalformedMatrix);
    }
    for i in 0..n {
        if dist[i][i] != 0.0 {
            return Err(ClusterError::MalformedMatrix);
        }
        for j in (i + 1)..n {
            if dist[i][j] < 0.0 || !dist[i][j].is_finite() {
                return Err(ClusterError::NegativeDistance(i, j));
            }
            if (dist[i][j] - dist[j][i]).abs() > 1e-9 {
                return Err(ClusterError::AsymmetricMatrix(i, j));
            }
        }
    }
    Ok(n)
}

fn linkage_distance(dist: &[Vec<f64>], a: &[usize], b: &[usize], linkage: Linkage) -> f64 {
    let pairs = a.iter().flat_map(|&x| b.iter().map(move |&z| dist[x][z]));
    match linkage {
        Linkage::Single => pairs.fold(f64::INFINITY, f64::min),
        Linkage::Complete => pairs.fold(f64::NEG_INFINITY, f64::max),
        Linkage::Average => {
            let sum: f64 = pairs.sum();
            sum / (a.len() * b.len()) as f64
        }
    }
}

/// Bottom-up merging: start from singletons and repeatedly fuse the
/// cluster pair at minimal linkage distance. Ties prefer the
/// lexicographically smallest pair of smallest member indices. Linkage
/// distances are recomputed directly from the matrix at every step,
/// which is fine at the scales this is meant for.
pub fn agglomerative(dist: &[Vec<f64>], linkage: Linkage) -> Result<Dendrogram, ClusterError> {
    let n = validate_matrix(dist)?;
    if n == 0 {
        return Err(ClusterError::MalformedMatrix);
    }
    struct Cluster {
        id: usize,
        members: Vec<usize>,
        min_member: usize,
    }
    let mut active: Vec<Cluster> = (0..n)
        .map(|i| Cluster { id: i, members: vec![i], min_member: i })
        .collect();
    let mut steps: Vec<Step> = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        let mut best: Option<(f64, (usize, usize), (usize, usize))> = None;
        for i in 0..active.len() {
            for j in (i + 1)..active.len() {
                let d = linkage_distance(dist, &active[i].members, &active[j].members, linkage);
                let key = (
                    active[i].min_member.min(active[j].min_member),
                    active[i].min_member.max(active[j].min_member),
                );
                let better = match &best {
                    None => true,
                    Some((bd, bkey, _)) => d < *bd || (d == *bd && key < *bkey),
                };
                if better {
                    best = Some((d, key, (i, j)));
                }
            }
        }
        let (height, _, (i, j)) = best.unwrap();
        let b = active.swap_remove(j);
        let a = active.swap_remove(i);
        let (first, second) = if a.min_member < b.min_member { (a, b) } else { (b, a) };
        let mut members = first.members;
        members.extend(second.members);
        members.sort_unstable();
        let id = n + steps.len();
        steps.push(Step { left: first.id, right: second.id, height });
        active.push(Cluster { id, members, min_member: first.min_member });
    }

    Ok(Dendrogram { n_leaves: n, steps, kind: DendrogramKind::Agglomerative(linkage) })
}

/// One divisive split in execution order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DianaSplit {
    /// cluster that was split, ascending member indices
    pub members: Vec<usize>,
    /// first object moved into the splinter group
    pub splinter_seed: usize,
    pub splinter: Vec<usize>,
    pub remainder: Vec<usize>,
    /// diameter of the split cluster (the dendrogram height)
    pub diameter: f64,
}

/// Top-down divisive clustering. Each round splits the cluster with the
/// largest diameter: the member with the largest average dissimilarity
/// to the others seeds a splinter group (ties to the lowest index), then
/// members keep defecting while some `D_x > 0`, where `D_x` is the
/// average distance of `x` to its own side minus its average distance to
/// the splinter side.
pub fn diana(dist: &[Vec<f64>]) -> Result<(Dendrogram, Vec<DianaSplit>), ClusterError> {
    let n = validate_matrix(dist)?;
    if n < 2 {
        return Err(ClusterError::MalformedMatrix);
    }

    let diameter = |members: &[usize]| -> f64 {
        let mut max = 0.0f64;
        for (p, &i) in members.iter().enumerate() {
            for &j in &members[p + 1..] {
                max = max.max(dist[i][j]);
            }
        }
        max
    };
    let avg_to = |x: usize, group: &[usize]| -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for &y in group {
            if y != x {
                sum += dist[x][y];
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            sum / count as f64
        }
    };

    struct Pending {
        members: Vec<usize>, // sorted ascending
        slot: Option<(usize, bool)>,
    }
    let mut queue: Vec<Pending> = vec![Pending { members: (0..n).collect(), slot: None }];
    // provisional nodes, (left, right, height); ids >= n refer to n + index
    let mut nodes: Vec<(usize, usize, f64)> = Vec::new();
    let mut trace = Vec::new();

    while !queue.is_empty() {
        // split the widest cluster next; ties to the lowest first member
        let pos = (0..queue.len())
            .max_by(|&a, &b| {
                diameter(&queue[a].members)
                    .total_cmp(&diameter(&queue[b].members))
                    .then_with(|| queue[b].members[0].cmp(&queue[a].members[0]))
            })
            .unwrap();
        let Pending { members, slot } = queue.remove(pos);
        let diam = diameter(&members);

        let seed = *members
            .iter()
            .max_by(|&&a, &&b| {
                avg_to(a, &members)
                    .total_cmp(&avg_to(b, &members))
                    .then(b.cmp(&a))
            })
            .unwrap();
        let mut splinter = vec![seed];
        let mut remainder: Vec<usize> =
            members.iter().copied().filter(|&x| x != seed).collect();
        loop {
            let defector = remainder
                .iter()
                .map(|&x| (avg_to(x, &remainder) - avg_to(x, &splinter), x))
                .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
            match defector {
                Some((dx, x)) if dx > 0.0 => {
                    remainder.retain(|&y| y != x);
                    splinter.push(x);
                }
                _ => break,
            }
        }
        splinter.sort_unstable();
        trace.push(DianaSplit {
            members,
            splinter_seed: seed,
            splinter: splinter.clone(),
            remainder: remainder.clone(),
            diameter: diam,
        });

        let node = nodes.len();
        nodes.push((usize::MAX, usize::MAX, diam));
        if let Some((parent, is_right)) = slot {
            if is_right {
                nodes[parent].1 = n + node;
            } else {
                nodes[parent].0 = n + node;
            }
        }
        for (group, is_right) in [(remainder, false), (splinter, true)] {
            if group.len() == 1 {
                if is_right {
                    nodes[node].1 = group[0];
                } else {
                    nodes[node].0 = group[0];
                }
            } else {
                queue.push(Pending { members: group, slot: Some((node, is_right)) });
            }
        }
    }

    // renumber provisional nodes bottom-up (children before parents)
    fn subtree_height(nodes: &[(usize, usize, f64)], n: usize, id: usize) -> usize {
        if id < n {
            0
        } else {
            let (l, r, _) = nodes[id - n];
            1 + subtree_height(nodes, n, l).max(subtree_height(nodes, n, r))
        }
    }
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by_key(|&i| (subtree_height(&nodes, n, n + i), i));
    let mut new_id = vec![0usize; nodes.len()];
    for (step, &old) in order.iter().enumerate() {
        new_id[old] = n + step;
    }
    let remap = |id: usize| if id < n { id } else { new_id[id - n] };
    let mut steps = vec![Step { left: 0, right: 0, height: 0.0 }; nodes.len()];
    for (old, &(l, r, h)) in nodes.iter().enumerate() {
        steps[new_id[old] - n] = Step { left: remap(l), right: remap(r), height: h };
    }
    Ok((Dendrogram { n_leaves: n, steps, kind: DendrogramKind::Diana }, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// the five-point matrix used throughout the worked examples
    pub(crate) fn book_matrix() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 9.0, 3.0, 6.0, 11.0],
            vec![9.0, 0.0, 7.0, 5.0, 10.0],
            vec![3.0, 7.0, 0.0, 9.0, 2.0],
            vec![6.0, 5.0, 9.0, 0.0, 8.0],
            vec![11.0, 10.0, 2.0, 8.0, 0.0],
        ]
    }

    #[test]
    fn complete_linkage_worked_example() {
        // rows a..e are indices 0..4
        let d = agglomerative(&book_matrix(), Linkage::Complete).unwrap();
        let heights: Vec<f64> = d.steps.iter().map(|s| s.height).collect();
        assert_eq!(heights, vec![2.0, 5.0, 9.0, 11.0]);
        assert_eq!(d.members(5), vec![2, 4]); // {c, e}
        assert_eq!(d.members(6), vec![1, 3]); // {b, d}
        assert_eq!(d.members(7), vec![0, 1, 3]); // {a} ∪ {b, d}
        assert_eq!(d.members(d.root()), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn equal_distances_merge_at_constant_height() {
        let m = vec![
            vec![0.0, 4.0, 4.0],
            vec![4.0, 0.0, 4.0],
            vec![4.0, 4.0, 0.0],
        ];
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let d = agglomerative(&m, linkage).unwrap();
            assert!(d.steps.iter().all(|s| s.height == 4.0));
        }
    }

    #[test]
    fn two_points_single_merge() {
        let m = vec![vec![0.0, 3.5], vec![3.5, 0.0]];
        let d = agglomerative(&m, Linkage::Single).unwrap();
        assert_eq!(d.steps.len(), 1);
        assert_eq!(d.steps[0].height, 3.5);
    }

    #[test]
    fn heights_non_decreasing_for_all_linkages() {
        let m = book_matrix();
        for linkage in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let d = agglomerative(&m, linkage).unwrap();
            for w in d.steps.windows(2) {
                assert!(w[1].height >= w[0].height);
            }
        }
    }

    #[test]
    fn malformed_matrices_rejected() {
        let asym = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
        assert!(matches!(
            agglomerative(&asym, Linkage::Single),
            Err(ClusterError::AsymmetricMatrix(0, 1))
        ));
        let neg = vec![vec![0.0, -1.0], vec![-1.0, 0.0]];
        assert!(matches!(
            agglomerative(&neg, Linkage::Single),
            Err(ClusterError::NegativeDistance(0, 1))
        ));
        let diag = vec![vec![1.0, 2.0], vec![2.0, 0.0]];
        assert!(matches!(
            agglomerative(&diag, Linkage::Single),
            Err(ClusterError::MalformedMatrix)
        ));
    }

    #[test]
    fn diana_worked_example_first_split() {
        let (d, trace) = diana(&book_matrix()).unwrap();
        // first split of {a..e}: splinter seeded at b, final {b, d} vs {a, c, e}
        assert_eq!(trace[0].members, vec![0, 1, 2, 3, 4]);
        assert_eq!(trace[0].splinter_seed, 1);
        assert_eq!(trace[0].splinter, vec![1, 3]);
        assert_eq!(trace[0].remainder, vec![0, 2, 4]);
        assert_eq!(trace[0].diameter, 11.0);
        assert_eq!(d.members(d.root()), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn diana_heights_non_increasing_toward_leaves() {
        let (d, _) = diana(&book_matrix()).unwrap();
        fn check(d: &Dendrogram, id: usize, bound: f64) {
            if id < d.n_leaves {
                return;
            }
            let step = &d.steps[id - d.n_leaves];
            assert!(step.height <= bound + 1e-12);
            check(d, step.left, step.height);
            check(d, step.right, step.height);
        }
        check(&d, d.root(), f64::INFINITY);
    }

    #[test]
    fn diana_two_points() {
        let m = vec![vec![0.0, 7.0], vec![7.0, 0.0]];
        let (d, trace) = diana(&m).unwrap();
        assert_eq!(d.steps.len(), 1);
        assert_eq!(d.steps[0].height, 7.0);
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn dendrogram_exports() {
        let m = vec![vec![0.0, 3.5], vec![3.5, 0.0]];
        let d = agglomerative(&m, Linkage::Single).unwrap();
        assert_eq!(d.to_newick(), "(0,1):3.5;");
        let json = d.to_json_value();
        assert_eq!(json["height"], 3.5);
        assert_eq!(json["left"]["leaf"], 0);
    }
}
