//! A single conditional estimator: recursive covariate-space partitioning
//! with GEV log-score impurity-drop split selection and pre-pruning.
//!
//! Fitting is best-first: at each growing iteration, among all current
//! leaves, the one whose optimal rule yields the maximum impurity drop is
//! split.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::gev::GevParams;
use crate::pwm;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("impurity drop is undefined for zero parent score")]
    ZeroParentScore,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("root partition does not admit a PWM fit: {0}")]
    RootUnfittable(String),
    #[error("covariate has {got} dimensions but the tree splits on dimension {dim}")]
    DimensionMismatch { dim: usize, got: usize },
}

/// Dimension-threshold dichotomy: observations with `x[dim] <= threshold`
/// go left, the rest go right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub dim: usize,
    pub threshold: f64,
}

/// Internal-node payload: the rule plus the two child subtrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub rule: SplitRule,
    pub left: Box<TreeNode>,
    pub right: Box<TreeNode>,
}

/// Node of a fitted tree. Every node carries the PWM fit of its partition;
/// a rule is present exactly when children are.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub params: GevParams,
    /// Sum of log scores of the partition members under `params`.
    pub log_score_total: f64,
    pub size: usize,
    pub split: Option<Split>,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    pub fn leaf_count(&self) -> usize {
        match &self.split {
            None => 1,
            Some(s) => s.left.leaf_count() + s.right.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match &self.split {
            None => 0,
            Some(s) => 1 + s.left.depth().max(s.right.depth()),
        }
    }
}

/// Pre-pruning knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub min_partition_size: usize,
    pub t_crit: f64,
    pub max_grow_iterations: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { min_partition_size: 30, t_crit: 0.01, max_grow_iterations: 40 }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.min_partition_size < 3 {
            return Err(TreeError::RootUnfittable(
                "min_partition_size must be at least 3 (PWM requirement)".into(),
            ));
        }
        if !(self.t_crit > 0.0) {
            return Err(TreeError::RootUnfittable("t_crit must be positive".into()));
        }
        if self.max_grow_iterations < 1 {
            return Err(TreeError::RootUnfittable("max_grow_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Relative reduction of the children log-score totals versus the parent:
/// T = (L_p − L_r − L_l) / L_p.
pub fn impurity_drop(parent_score: f64, left_score: f64, right_score: f64) -> Result<f64, TreeError> {
    if parent_score == 0.0 {
        return Err(TreeError::ZeroParentScore);
    }
    Ok((parent_score - left_score - right_score) / parent_score)
}

fn score_total(params: &GevParams, targets: &[f64]) -> f64 {
    targets.iter().map(|&y| params.log_score(y)).sum()
}

/// Insert into / remove from a sorted vector, preserving order.
fn sorted_insert(vec: &mut Vec<f64>, v: f64) {
    let pos = vec.partition_point(|&x| x < v);
    vec.insert(pos, v);
}

fn sorted_remove(vec: &mut Vec<f64>, v: f64) {
    let pos = vec.partition_point(|&x| x < v);
    debug_assert!(vec[pos] == v);
    vec.remove(pos);
}

/// Exhaustive scan over every covariate dimension and every
/// adjacent-unique-value midpoint; returns the admissible rule maximizing
/// the impurity drop, or `None` when no candidate is admissible.
///
/// Candidates whose children cannot be PWM-fitted are silently
/// disqualified. Ties break toward the lower dimension, then the lower
/// threshold (the scan order).
pub fn best_split(data: &Dataset, indices: &[usize], config: &TreeConfig) -> Option<(SplitRule, f64)> {
    let targets: Vec<f64> = indices.iter().map(|&i| data.target(i)).collect();
    let parent = pwm::estimate(&targets).ok()?;
    let parent_score = score_total(&parent, &targets);
    best_split_scored(data, indices, config, parent_score)
}

pub(crate) fn best_split_scored(
    data: &Dataset,
    indices: &[usize],
    config: &TreeConfig,
    parent_score: f64,
) -> Option<(SplitRule, f64)> {
    let n = indices.len();
    if n < 2 * config.min_partition_size || parent_score == 0.0 {
        return None;
    }
    let min = config.min_partition_size;
    let mut best: Option<(f64, SplitRule)> = None;

    for dim in 0..data.n_dims() {
        // Order by covariate value (stable in the original index order for
        // determinism across permutations of equal values).
        let mut order: Vec<usize> = indices.to_vec();
        order.sort_by(|&a, &b| {
            data.row(a)[dim]
                .partial_cmp(&data.row(b)[dim])
                .unwrap()
                .then(a.cmp(&b))
        });
        let xs: Vec<f64> = order.iter().map(|&i| data.row(i)[dim]).collect();
        if xs[0] == xs[n - 1] {
            continue; // constant column contributes no candidates
        }

        // Sweep thresholds left to right, maintaining ascending-sorted
        // target arrays for both transient children.
        let mut left_sorted: Vec<f64> = Vec::with_capacity(n);
        let mut right_sorted: Vec<f64> = order.iter().map(|&i| data.target(i)).collect();
        right_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut i = 0;
        while i < n {
            let x = xs[i];
            let mut j = i;
            while j < n && xs[j] == x {
                let y = data.target(order[j]);
                sorted_remove(&mut right_sorted, y);
                sorted_insert(&mut left_sorted, y);
                j += 1;
            }
            i = j;
            if i == n {
                break;
            }
            if i < min || n - i < min {
                continue;
            }
            let threshold = 0.5 * (x + xs[i]);
            let Ok(left_fit) = pwm::estimate_sorted(&left_sorted) else { continue };
            let Ok(right_fit) = pwm::estimate_sorted(&right_sorted) else { continue };
            let left_score = score_total(&left_fit, &left_sorted);
            let right_score = score_total(&right_fit, &right_sorted);
            let drop = (parent_score - left_score - right_score) / parent_score;
            if best.as_ref().map_or(true, |(b, _)| drop > *b) {
                best = Some((drop, SplitRule { dim, threshold }));
            }
        }
    }
    best.map(|(drop, rule)| (rule, drop))
}

struct OpenLeaf {
    node: usize,
    indices: Vec<usize>,
    best: Option<(SplitRule, f64)>,
}

struct BuildNode {
    params: GevParams,
    score: f64,
    size: usize,
    rule: Option<SplitRule>,
    children: Option<(usize, usize)>,
}

/// Fit a single tree by best-first growth with pre-pruning.
pub fn fit_tree(data: &Dataset, config: &TreeConfig) -> Result<TreeNode, TreeError> {
    config.validate()?;
    if data.n_rows() == 0 {
        return Err(TreeError::EmptyDataset);
    }
    let root_indices: Vec<usize> = (0..data.n_rows()).collect();
    let root_fit = pwm::estimate(data.targets())
        .map_err(|e| TreeError::RootUnfittable(e.to_string()))?;
    let root_score = score_total(&root_fit, data.targets());

    let mut nodes = vec![BuildNode {
        params: root_fit,
        score: root_score,
        size: data.n_rows(),
        rule: None,
        children: None,
    }];
    let mut open = vec![OpenLeaf {
        node: 0,
        indices: root_indices.clone(),
        best: best_split_scored(data, &root_indices, config, root_score),
    }];

    for _ in 0..config.max_grow_iterations {
        // Growing leaf: maximum drop at or above t_crit; ties go to the
        // earliest-created leaf.
        let grow = open
            .iter()
            .enumerate()
            .filter_map(|(pos, leaf)| leaf.best.map(|(_, drop)| (pos, drop)))
            .filter(|&(_, drop)| drop >= config.t_crit)
            .fold(None, |acc: Option<(usize, f64)>, (pos, drop)| match acc {
                Some((_, best)) if best >= drop => acc,
                _ => Some((pos, drop)),
            });
        let Some((pos, _)) = grow else { break };

        let leaf = open.swap_remove(pos);
        let (rule, _) = leaf.best.expect("selected leaf has a split");
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = leaf
            .indices
            .iter()
            .partition(|&&i| data.row(i)[rule.dim] <= rule.threshold);

        let mut make_child = |indices: Vec<usize>| -> usize {
            let targets: Vec<f64> = indices.iter().map(|&i| data.target(i)).collect();
            let fit = pwm::estimate(&targets).expect("admissible candidate children fit");
            let score = score_total(&fit, &targets);
            let id = nodes.len();
            nodes.push(BuildNode {
                params: fit,
                score,
                size: indices.len(),
                rule: None,
                children: None,
            });
            let best = best_split_scored(data, &indices, config, score);
            open.push(OpenLeaf { node: id, indices, best });
            id
        };
        let left_id = make_child(left_idx);
        let right_id = make_child(right_idx);
        nodes[leaf.node].rule = Some(rule);
        nodes[leaf.node].children = Some((left_id, right_id));
    }

    Ok(assemble(&nodes, 0))
}

fn assemble(nodes: &[BuildNode], id: usize) -> TreeNode {
    let node = &nodes[id];
    TreeNode {
        params: node.params,
        log_score_total: node.score,
        size: node.size,
        split: node.children.map(|(l, r)| Split {
            rule: node.rule.expect("rule present with children"),
            left: Box::new(assemble(nodes, l)),
            right: Box::new(assemble(nodes, r)),
        }),
    }
}

/// Descend the splitting rules in topological order (`<=` goes left) and
/// return the reached leaf's parameters.
pub fn predict_tree(tree: &TreeNode, x: &[f64]) -> Result<GevParams, TreeError> {
    let mut node = tree;
    while let Some(split) = &node.split {
        if split.rule.dim >= x.len() {
            return Err(TreeError::DimensionMismatch { dim: split.rule.dim, got: x.len() });
        }
        node = if x[split.rule.dim] <= split.rule.threshold {
            &split.left
        } else {
            &split.right
        };
    }
    Ok(node.params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impurity_drop_arithmetic() {
        assert_eq!(impurity_drop(10.0, 4.0, 6.0).unwrap(), 0.0);
        assert!((impurity_drop(10.0, 3.0, 4.0).unwrap() - 0.3).abs() < 1e-15);
        // Negative parent score flips the sign: a raw reduction becomes a
        // negative (rejected) drop.
        assert!((impurity_drop(-5.0, -3.0, -4.0).unwrap() - (-0.4)).abs() < 1e-15);
        assert_eq!(impurity_drop(0.0, 1.0, 2.0), Err(TreeError::ZeroParentScore));
    }

    fn single_column(xs: Vec<f64>, ys: Vec<f64>) -> Dataset {
        let rows = xs.into_iter().map(|x| vec![x]).collect();
        Dataset::new(rows, ys, vec!["x".into()]).unwrap()
    }

    #[test]
    fn undersized_partition_has_no_split() {
        let n = 30;
        let data = single_column(
            (0..n).map(|i| i as f64).collect(),
            (0..n).map(|i| (i % 7) as f64).collect(),
        );
        let config = TreeConfig { min_partition_size: 20, ..TreeConfig::default() };
        let indices: Vec<usize> = (0..n).collect();
        assert!(best_split(&data, &indices, &config).is_none());
    }

    #[test]
    fn constant_covariate_column_yields_no_candidates() {
        let n = 80;
        let ys: Vec<f64> = (0..n).map(|i| ((i * 31 + 7) % 97) as f64 / 10.0).collect();
        let data = single_column(vec![1.0; n], ys);
        let config = TreeConfig { min_partition_size: 10, ..TreeConfig::default() };
        let indices: Vec<usize> = (0..n).collect();
        assert!(best_split(&data, &indices, &config).is_none());
    }

    #[test]
    fn empty_dataset_rejected() {
        let data = Dataset::new(vec![], vec![], vec!["x".into()]).unwrap();
        assert!(matches!(fit_tree(&data, &TreeConfig::default()), Err(TreeError::EmptyDataset)));
    }

    #[test]
    fn constant_targets_make_root_unfittable() {
        let data = single_column((0..50).map(|i| i as f64).collect(), vec![3.0; 50]);
        assert!(matches!(
            fit_tree(&data, &TreeConfig::default()),
            Err(TreeError::RootUnfittable(_))
        ));
    }

    #[test]
    fn boundary_covariate_goes_left() {
        let leaf = |mu: f64| TreeNode {
            params: GevParams::new(mu, 1.0, 0.0).unwrap(),
            log_score_total: 0.0,
            size: 10,
            split: None,
        };
        let tree = TreeNode {
            params: GevParams::new(0.0, 1.0, 0.0).unwrap(),
            log_score_total: 0.0,
            size: 20,
            split: Some(Split {
                rule: SplitRule { dim: 0, threshold: 0.5 },
                left: Box::new(leaf(-1.0)),
                right: Box::new(leaf(1.0)),
            }),
        };
        assert_eq!(predict_tree(&tree, &[0.5]).unwrap().mu, -1.0);
        assert_eq!(predict_tree(&tree, &[0.5000001]).unwrap().mu, 1.0);
        assert!(matches!(
            predict_tree(&tree, &[]),
            Err(TreeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn depth_zero_tree_predicts_root_params_for_any_x() {
        let root = TreeNode {
            params: GevParams::new(2.0, 1.5, 0.1).unwrap(),
            log_score_total: 0.0,
            size: 50,
            split: None,
        };
        assert_eq!(predict_tree(&root, &[123.0]).unwrap(), root.params);
        assert_eq!(predict_tree(&root, &[]).unwrap(), root.params);
    }
}
