//! Greedy squared-error splitting shared by outcome and causal trees.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::{Tree, TreeNode, TreeParams};
use crate::data::Sample;
use crate::error::Result;
use crate::scalar::Scalar;

/// Work (node size times features) above which features are scanned in parallel.
const PARALLEL_WORK: usize = 1 << 16;

#[derive(Debug, Clone, Copy)]
pub(crate) enum LeafConstraint {
    /// Each child keeps at least this many samples.
    Count(usize),
    /// Each child keeps at least this many treated and this many control samples.
    PerArm(usize),
}

impl LeafConstraint {
    fn admits(self, n: usize, n_treated: usize) -> bool {
        match self {
            LeafConstraint::Count(m) => n >= m,
            LeafConstraint::PerArm(m) => n_treated >= m && n - n_treated >= m,
        }
    }
}

pub(crate) struct LeafStats<T> {
    pub estimate: T,
    pub n_samples: usize,
    pub n_treated: Option<usize>,
}

/// Per-sample regression targets over a sample slice; `targets[i]` belongs
/// to `samples[i]`.
pub(crate) struct SplitProblem<'a, T> {
    pub samples: &'a [Sample<T>],
    pub targets: &'a [T],
    pub constraint: LeafConstraint,
    pub n_features: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Split<T> {
    pub feature: usize,
    pub threshold: T,
    pub gain: T,
}

pub(crate) fn midpoint<T: Scalar>(lo: T, hi: T) -> T {
    let mid = (lo + hi) / T::lit(2.0);
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

/// Sum of squared deviations from the mean of `targets[idx]`.
pub(crate) fn sse<T: Scalar>(targets: &[T], idx: &[usize]) -> T {
    if idx.is_empty() {
        return T::zero();
    }
    let n = T::from_usize_lossy(idx.len());
    let mut sum = T::zero();
    for &i in idx {
        sum += targets[i];
    }
    let mean = sum / n;
    let mut ss = T::zero();
    for &i in idx {
        let d = targets[i] - mean;
        ss += d * d;
    }
    ss
}

fn best_for_feature<T: Scalar>(
    problem: &SplitProblem<'_, T>,
    idx: &[usize],
    feature: usize,
    mean: T,
    parent_sse: T,
) -> Option<Split<T>> {
    let x = |i: usize| problem.samples[i].features[feature];
    let mut order = idx.to_vec();
    order.sort_by(|&a, &b| {
        x(a).partial_cmp(&x(b))
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let n = order.len();
    let n_treated_total = order
        .iter()
        .filter(|&&i| problem.samples[i].treatment.is_treated())
        .count();
    let (mut total_s, mut total_q) = (T::zero(), T::zero());
    for &i in &order {
        let z = problem.targets[i] - mean;
        total_s += z;
        total_q += z * z;
    }
    let (mut s, mut q, mut n_treated) = (T::zero(), T::zero(), 0usize);
    let mut best: Option<Split<T>> = None;
    for pos in 0..n - 1 {
        let i = order[pos];
        let z = problem.targets[i] - mean;
        s += z;
        q += z * z;
        if problem.samples[i].treatment.is_treated() {
            n_treated += 1;
        }
        let (lo, hi) = (x(i), x(order[pos + 1]));
        if !(lo < hi) {
            continue;
        }
        let n_left = pos + 1;
        if !problem.constraint.admits(n_left, n_treated)
            || !problem
                .constraint
                .admits(n - n_left, n_treated_total - n_treated)
        {
            continue;
        }
        let nl = T::from_usize_lossy(n_left);
        let nr = T::from_usize_lossy(n - n_left);
        let sse_left = q - s * s / nl;
        let sr = total_s - s;
        let sse_right = (total_q - q) - sr * sr / nr;
        let gain = parent_sse - sse_left - sse_right;
        if best.is_none_or(|b| gain > b.gain) {
            best = Some(Split {
                feature,
                threshold: midpoint(lo, hi),
                gain,
            });
        }
    }
    best
}

/// Best admissible split of the samples at `idx`, by SSE reduction.
pub(crate) fn best_split<T: Scalar>(
    problem: &SplitProblem<'_, T>,
    idx: &[usize],
) -> Option<Split<T>> {
    if idx.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(idx.len());
    let mean = idx
        .iter()
        .fold(T::zero(), |acc, &i| acc + problem.targets[i])
        / n;
    let parent_sse = sse(problem.targets, idx);
    let per_feature: Vec<Option<Split<T>>> = if idx.len() * problem.n_features >= PARALLEL_WORK {
        (0..problem.n_features)
            .into_par_iter()
            .map(|f| best_for_feature(problem, idx, f, mean, parent_sse))
            .collect()
    } else {
        (0..problem.n_features)
            .map(|f| best_for_feature(problem, idx, f, mean, parent_sse))
            .collect()
    };
    // Strict improvement keeps the lowest feature index among ties.
    per_feature
        .into_iter()
        .flatten()
        .fold(None, |best, cand| match best {
            Some(b) if !(cand.gain > b.gain) => Some(b),
            _ => Some(cand),
        })
}

/// Whether `gain` clears both the configured floor and rounding noise.
pub(crate) fn accept_gain<T: Scalar>(gain: T, parent_impurity: T, min_gain: T) -> bool {
    let noise = T::epsilon() * T::lit(64.0) * (parent_impurity.abs() + T::one());
    gain > noise && gain >= min_gain
}

/// Grows a tree greedily over the samples at `idx`.
pub(crate) fn grow<T: Scalar, L>(
    problem: &SplitProblem<'_, T>,
    idx: Vec<usize>,
    params: &TreeParams,
    leaf: &L,
) -> Result<Tree<T>>
where
    L: Fn(&[usize]) -> LeafStats<T>,
{
    let mut nodes = Vec::new();
    let min_gain = T::lit(params.min_split_gain);
    grow_node(problem, idx, params.max_depth, min_gain, leaf, &mut nodes);
    Tree::from_nodes(problem.n_features, nodes)
}

fn grow_node<T: Scalar, L>(
    problem: &SplitProblem<'_, T>,
    idx: Vec<usize>,
    depth_left: usize,
    min_gain: T,
    leaf: &L,
    nodes: &mut Vec<TreeNode<T>>,
) where
    L: Fn(&[usize]) -> LeafStats<T>,
{
    let here = nodes.len();
    let split = if depth_left == 0 {
        None
    } else {
        best_split(problem, &idx)
            .filter(|s| accept_gain(s.gain, sse(problem.targets, &idx), min_gain))
    };
    let Some(split) = split else {
        let stats = leaf(&idx);
        nodes.push(TreeNode::Leaf {
            estimate: stats.estimate,
            n_samples: stats.n_samples,
            n_treated: stats.n_treated,
        });
        return;
    };
    let (left, right): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| problem.samples[i].features[split.feature] <= split.threshold);
    nodes.push(TreeNode::Internal {
        feature_index: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left_at = nodes.len();
    grow_node(problem, left, depth_left - 1, min_gain, leaf, nodes);
    let right_at = nodes.len();
    grow_node(problem, right, depth_left - 1, min_gain, leaf, nodes);
    if let TreeNode::Internal { left, right, .. } = &mut nodes[here] {
        *left = left_at;
        *right = right_at;
    }
}
