//! Treatment assignment as importance-weighted classification.
//!
//! A policy's weighted misclassification on the reduced set and its IPS value
//! on the logged data sum to a policy-independent constant, so a classifier
//! minimizing the former maximizes the latter.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TreatmentLevel};
use crate::error::{CdmError, Result};
use crate::model::Policy;
use crate::scalar::Scalar;
use crate::trees::{accept_gain, midpoint, Tree, TreeNode, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedExample<T> {
    pub features: Vec<T>,
    pub label: TreatmentLevel,
    pub weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedClassificationSet<T> {
    examples: Vec<WeightedExample<T>>,
    outcome_offset: T,
}

impl<T: Scalar> WeightedClassificationSet<T> {
    pub fn new(examples: Vec<WeightedExample<T>>, outcome_offset: T) -> Result<Self> {
        let Some(first) = examples.first() else {
            return Err(CdmError::Data(
                "weighted classification set is empty".into(),
            ));
        };
        let width = first.features.len();
        for (i, e) in examples.iter().enumerate() {
            if !(e.weight.is_finite() && e.weight >= T::zero()) {
                return Err(CdmError::Data(format!(
                    "example {i}: weight {} is not finite and >= 0",
                    e.weight
                )));
            }
            if e.features.len() != width || e.features.iter().any(|v| !v.is_finite()) {
                return Err(CdmError::Data(format!("example {i}: bad feature vector")));
            }
        }
        Ok(WeightedClassificationSet {
            examples,
            outcome_offset,
        })
    }

    pub fn examples(&self) -> &[WeightedExample<T>] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.examples[0].features.len()
    }

    /// Shift `c` added to every outcome before weighting.
    pub fn outcome_offset(&self) -> T {
        self.outcome_offset
    }

    pub fn total_weight(&self) -> T {
        self.examples
            .iter()
            .fold(T::zero(), |acc, e| acc + e.weight)
    }

    /// Total weight of examples whose label the policy does not assign.
    pub fn weighted_error<P: Policy<T> + ?Sized>(&self, policy: &P) -> T {
        self.examples
            .iter()
            .filter(|e| policy.assign(&e.features) != e.label)
            .fold(T::zero(), |acc, e| acc + e.weight)
    }
}

/// IPS reduction: `(x, t, y)` becomes `(x, label = t, weight = (y + c) / p(t | x))`
/// with `c = max(0, -min y)`.
pub fn to_weighted_classification<T: Scalar>(
    dataset: &Dataset<T>,
) -> Result<WeightedClassificationSet<T>> {
    let probs = dataset.arm_probabilities("weighted classification reduction")?;
    let min_y = dataset
        .samples()
        .iter()
        .fold(T::infinity(), |m, s| m.min(s.outcome));
    let c = T::zero().max(-min_y);
    let examples = dataset
        .samples()
        .iter()
        .zip(probs)
        .map(|(s, p)| WeightedExample {
            features: s.features.clone(),
            label: s.treatment,
            weight: (s.outcome + c) / p,
        })
        .collect();
    WeightedClassificationSet::new(examples, c)
}

/// Full-information reduction for synthetic data: each unit contributes one
/// example per arm, weighted by that arm's potential outcome plus `c`
/// (`c = max(0, -min` over all potential outcomes`)`). A policy's weighted error
/// is then `n * (c + mean Y(1 - policy))`, so minimizing it minimizes oracle
/// regret.
pub fn to_full_information_classification<T: Scalar>(
    dataset: &Dataset<T>,
) -> Result<WeightedClassificationSet<T>> {
    let oracles = dataset.oracles("full-information reduction")?;
    let min_y = oracles
        .iter()
        .flat_map(|o| o.potential_outcomes)
        .fold(T::infinity(), |m, y| m.min(y));
    let c = T::zero().max(-min_y);
    let mut examples = Vec::with_capacity(2 * dataset.len());
    for (s, o) in dataset.samples().iter().zip(oracles) {
        for level in [TreatmentLevel::CONTROL, TreatmentLevel::TREATED] {
            examples.push(WeightedExample {
                features: s.features.clone(),
                label: level,
                weight: o.outcome(level) + c,
            });
        }
    }
    WeightedClassificationSet::new(examples, c)
}

/// Classification tree policy; each leaf stores the weight share of label 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTree<T> {
    pub(crate) tree: Tree<T>,
}

impl<T: Scalar> PolicyTree<T> {
    pub fn tree(&self) -> &Tree<T> {
        &self.tree
    }

    pub fn from_tree(tree: Tree<T>) -> Self {
        PolicyTree { tree }
    }
}

impl<T: Scalar> Policy<T> for PolicyTree<T> {
    fn assign(&self, x: &[T]) -> TreatmentLevel {
        TreatmentLevel::from_bool(self.tree.predict(x) > T::lit(0.5))
    }

    fn score(&self, x: &[T]) -> Option<T> {
        Some(self.tree.predict(x) - T::lit(0.5))
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.tree.n_features())
    }
}

struct Problem<'a, T> {
    examples: &'a [WeightedExample<T>],
    n_features: usize,
    min_leaf: usize,
    min_gain: T,
}

impl<T: Scalar> Problem<'_, T> {
    fn x(&self, i: usize, f: usize) -> T {
        self.examples[i].features[f]
    }

    /// `+w` for label 0, `-w` for label 1: the prefix sum of this over a left
    /// child is `W0_left - W1_left`.
    fn signed(&self, i: usize) -> T {
        let e = &self.examples[i];
        if e.label.is_treated() {
            -e.weight
        } else {
            e.weight
        }
    }

    fn masses(&self, idx: &[usize]) -> (T, T) {
        idx.iter().fold((T::zero(), T::zero()), |(w0, w1), &i| {
            let e = &self.examples[i];
            if e.label.is_treated() {
                (w0, w1 + e.weight)
            } else {
                (w0 + e.weight, w1)
            }
        })
    }

    fn sorted_by(&self, idx: &[usize], f: usize) -> Vec<usize> {
        let mut order = idx.to_vec();
        order.sort_by(|&a, &b| {
            self.x(a, f)
                .partial_cmp(&self.x(b, f))
                .expect("finite features")
                .then(a.cmp(&b))
        });
        order
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    feature: usize,
    threshold: T,
    /// Correctly classified weight attained below this node.
    value: T,
}

/// Best correct weight of one split on `P = W0_left - W1_left`: either child
/// may take either label.
fn split_value<T: Scalar>(w0: T, w1: T, p: T) -> T {
    (w1 + p).max(w0 - p)
}

fn best_single<T: Scalar>(pb: &Problem<'_, T>, idx: &[usize]) -> Option<Candidate<T>> {
    let k = idx.len();
    if k < 2 * pb.min_leaf {
        return None;
    }
    let (w0, w1) = pb.masses(idx);
    let mut best: Option<Candidate<T>> = None;
    for f in 0..pb.n_features {
        let order = pb.sorted_by(idx, f);
        let mut p = T::zero();
        for pos in 0..k - 1 {
            p += pb.signed(order[pos]);
            let n_left = pos + 1;
            let (lo, hi) = (pb.x(order[pos], f), pb.x(order[pos + 1], f));
            if !(lo < hi) || n_left < pb.min_leaf || k - n_left < pb.min_leaf {
                continue;
            }
            let value = split_value(w0, w1, p);
            if best.is_none_or(|b| value > b.value) {
                best = Some(Candidate {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    value,
                });
            }
        }
    }
    best
}

#[derive(Clone, Copy)]
struct Agg<T> {
    sum: T,
    max_prefix: T,
    min_prefix: T,
    count: u32,
}

impl<T: Scalar> Agg<T> {
    fn identity() -> Self {
        Agg {
            sum: T::zero(),
            max_prefix: T::neg_infinity(),
            min_prefix: T::infinity(),
            count: 0,
        }
    }

    fn then(self, b: Self) -> Self {
        Agg {
            sum: self.sum + b.sum,
            max_prefix: self.max_prefix.max(self.sum + b.max_prefix),
            min_prefix: self.min_prefix.min(self.sum + b.min_prefix),
            count: self.count + b.count,
        }
    }
}

/// Segment tree over one feature's sorted positions within a node. Each
/// position holds a member's signed weight (or nothing); prefix extrema only
/// count positions that sit on a boundary between distinct feature values.
struct PrefixTree<T> {
    size: usize,
    nodes: Vec<Agg<T>>,
    boundary: Vec<bool>,
}

impl<T: Scalar> PrefixTree<T> {
    fn new(boundary: Vec<bool>) -> Self {
        let size = boundary.len().next_power_of_two();
        PrefixTree {
            size,
            nodes: vec![Agg::identity(); 2 * size],
            boundary,
        }
    }

    fn leaf(&self, pos: usize, value: Option<T>) -> Agg<T> {
        let sum = value.unwrap_or_else(T::zero);
        let on_boundary = self.boundary.get(pos).copied().unwrap_or(false);
        Agg {
            sum,
            max_prefix: if on_boundary { sum } else { T::neg_infinity() },
            min_prefix: if on_boundary { sum } else { T::infinity() },
            count: u32::from(value.is_some()),
        }
    }

    fn fill(&mut self, values: &[T]) {
        for pos in 0..self.size {
            self.nodes[self.size + pos] = self.leaf(pos, values.get(pos).copied());
        }
        for i in (1..self.size).rev() {
            self.nodes[i] = self.nodes[2 * i].then(self.nodes[2 * i + 1]);
        }
    }

    fn clear(&mut self) {
        for pos in 0..self.size {
            self.nodes[self.size + pos] = self.leaf(pos, None);
        }
        for i in (1..self.size).rev() {
            self.nodes[i] = self.nodes[2 * i].then(self.nodes[2 * i + 1]);
        }
    }

    fn set(&mut self, pos: usize, value: Option<T>) {
        let mut i = self.size + pos;
        self.nodes[i] = self.leaf(pos, value);
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.nodes[2 * i].then(self.nodes[2 * i + 1]);
        }
    }

    fn count(&self) -> usize {
        self.nodes[1].count as usize
    }

    /// Position of the `m`-th (1-based) member.
    fn kth(&self, mut m: u32) -> usize {
        let mut i = 1;
        while i < self.size {
            let left = self.nodes[2 * i].count;
            if left >= m {
                i *= 2;
            } else {
                m -= left;
                i = 2 * i + 1;
            }
        }
        i - self.size
    }

    /// Aggregate over positions `lo..=hi`.
    fn query(&self, lo: usize, hi: usize) -> Agg<T> {
        let (mut l, mut r) = (lo + self.size, hi + self.size + 1);
        let (mut left, mut right) = (Agg::identity(), Agg::identity());
        while l < r {
            if l & 1 == 1 {
                left = left.then(self.nodes[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                right = self.nodes[r].then(right);
            }
            l /= 2;
            r /= 2;
        }
        left.then(right)
    }

    /// Best correct weight of the members with at most one further split,
    /// each side keeping `min_leaf` members.
    fn best_value(&self, w0: T, w1: T, min_leaf: usize) -> T {
        let leaf = w0.max(w1);
        let k = self.count();
        if min_leaf == 0 || k < 2 * min_leaf {
            return leaf;
        }
        let lo = self.kth(min_leaf as u32);
        let hi_member = self.kth((k - min_leaf + 1) as u32);
        if hi_member == 0 || lo > hi_member - 1 {
            return leaf;
        }
        let range = self.query(lo, hi_member - 1);
        let before = if lo == 0 {
            T::zero()
        } else {
            self.query(0, lo - 1).sum
        };
        if range.max_prefix == T::neg_infinity() {
            return leaf;
        }
        let best = (w1 + before + range.max_prefix).max(w0 - before - range.min_prefix);
        leaf.max(best)
    }
}

/// Best root split of `idx` when each child may split once more.
fn best_lookahead<T: Scalar>(pb: &Problem<'_, T>, idx: &[usize]) -> Option<Candidate<T>> {
    let k = idx.len();
    if k < 2 * pb.min_leaf {
        return None;
    }
    let d = pb.n_features;
    // Local ids 0..k index into `idx`.
    let local: Vec<usize> = (0..k).collect();
    let global = |l: usize| idx[l];
    let mut position = vec![vec![0usize; k]; d];
    let mut boundary = Vec::with_capacity(d);
    let mut signed_by_pos = Vec::with_capacity(d);
    for g in 0..d {
        let mut order = local.clone();
        order.sort_by(|&a, &b| {
            pb.x(global(a), g)
                .partial_cmp(&pb.x(global(b), g))
                .expect("finite features")
                .then(a.cmp(&b))
        });
        for (p, &l) in order.iter().enumerate() {
            position[g][l] = p;
        }
        boundary.push(
            (0..k)
                .map(|p| p + 1 < k && pb.x(global(order[p]), g) < pb.x(global(order[p + 1]), g))
                .collect::<Vec<bool>>(),
        );
        signed_by_pos.push(
            order
                .iter()
                .map(|&l| pb.signed(global(l)))
                .collect::<Vec<T>>(),
        );
    }
    let mut left: Vec<PrefixTree<T>> = boundary
        .iter()
        .map(|b| PrefixTree::new(b.clone()))
        .collect();
    let mut right: Vec<PrefixTree<T>> = boundary.into_iter().map(PrefixTree::new).collect();
    let (w0, w1) = pb.masses(idx);

    let mut best: Option<Candidate<T>> = None;
    for f in 0..d {
        for g in 0..d {
            left[g].clear();
            right[g].fill(&signed_by_pos[g]);
        }
        let mut order = local.clone();
        order.sort_by(|&a, &b| position[f][a].cmp(&position[f][b]));
        let (mut w0l, mut w1l) = (T::zero(), T::zero());
        for pos in 0..k - 1 {
            let l = order[pos];
            let e = &pb.examples[global(l)];
            if e.label.is_treated() {
                w1l += e.weight;
            } else {
                w0l += e.weight;
            }
            let s = pb.signed(global(l));
            for g in 0..d {
                left[g].set(position[g][l], Some(s));
                right[g].set(position[g][l], None);
            }
            let n_left = pos + 1;
            let (lo, hi) = (pb.x(global(l), f), pb.x(global(order[pos + 1]), f));
            if !(lo < hi) || n_left < pb.min_leaf || k - n_left < pb.min_leaf {
                continue;
            }
            let (w0r, w1r) = (w0 - w0l, w1 - w1l);
            let mut best_left = w0l.max(w1l);
            let mut best_right = w0r.max(w1r);
            for g in 0..d {
                best_left = best_left.max(left[g].best_value(w0l, w1l, pb.min_leaf));
                best_right = best_right.max(right[g].best_value(w0r, w1r, pb.min_leaf));
            }
            let value = best_left + best_right;
            if best.is_none_or(|b| value > b.value) {
                best = Some(Candidate {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    value,
                });
            }
        }
    }
    best
}

fn grow_policy<T: Scalar>(
    pb: &Problem<'_, T>,
    idx: Vec<usize>,
    depth_left: usize,
    nodes: &mut Vec<TreeNode<T>>,
) {
    let here = nodes.len();
    let (w0, w1) = pb.masses(&idx);
    let leaf_value = w0.max(w1);
    let candidate = match depth_left {
        0 => None,
        1 => best_single(pb, &idx),
        _ => best_lookahead(pb, &idx),
    };
    let split = candidate.filter(|c| accept_gain(c.value - leaf_value, w0 + w1, pb.min_gain));
    let Some(split) = split else {
        let total = w0 + w1;
        let share = if total > T::zero() {
            w1 / total
        } else {
            T::lit(0.5)
        };
        nodes.push(TreeNode::Leaf {
            estimate: share,
            n_samples: idx.len(),
            n_treated: None,
        });
        return;
    };
    let (left, right): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| pb.x(i, split.feature) <= split.threshold);
    nodes.push(TreeNode::Internal {
        feature_index: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left_at = nodes.len();
    grow_policy(pb, left, depth_left - 1, nodes);
    let right_at = nodes.len();
    grow_policy(pb, right, depth_left - 1, nodes);
    if let TreeNode::Internal { left, right, .. } = &mut nodes[here] {
        *left = left_at;
        *right = right_at;
    }
}

/// Fits a classification tree minimizing weighted misclassification.
///
/// Nodes with at least two levels of depth left choose their split by
/// looking one level further ahead, so trees of depth at most 2 are optimal
/// over all axis-aligned trees of that depth. The last level splits greedily.
/// Leaves assign treatment when label 1 holds more than half the weight.
pub fn fit_policy_tree<T: Scalar>(
    wset: &WeightedClassificationSet<T>,
    params: &TreeParams,
) -> Result<PolicyTree<T>> {
    params.validate()?;
    if !(wset.total_weight() > T::zero()) {
        return Err(CdmError::Precondition(
            "policy tree: total example weight is zero, nothing to learn".into(),
        ));
    }
    if wset.n_features() == 0 {
        return Err(CdmError::Precondition(
            "policy tree needs at least one feature".into(),
        ));
    }
    let pb = Problem {
        examples: wset.examples(),
        n_features: wset.n_features(),
        min_leaf: params.min_leaf,
        min_gain: T::lit(params.min_split_gain),
    };
    let mut nodes = Vec::new();
    grow_policy(&pb, (0..wset.len()).collect(), params.max_depth, &mut nodes);
    Ok(PolicyTree {
        tree: Tree::from_nodes(wset.n_features(), nodes)?,
    })
}

/// Both sides of the reduction identity for one policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretEquivalence<T> {
    /// Weighted misclassification divided by `n`.
    pub weighted_error: T,
    /// IPS value of the policy on outcomes shifted by the reduction offset.
    pub ips_value: T,
    /// Total weight divided by `n`; equals the sum of the two fields above.
    pub total_mass: T,
}

/// Computes weighted error and shifted-outcome IPS value independently and
/// checks that they sum to the policy-independent total mass.
pub fn regret_equivalence_check<T: Scalar, P: Policy<T> + ?Sized>(
    dataset: &Dataset<T>,
    policy: &P,
) -> Result<RegretEquivalence<T>> {
    let wset = to_weighted_classification(dataset)?;
    let n = T::from_usize_lossy(dataset.len());
    let c = wset.outcome_offset();
    let probs = dataset.arm_probabilities("regret equivalence")?;
    let mut ips = T::zero();
    for (s, p) in dataset.samples().iter().zip(probs) {
        if policy.assign(&s.features) == s.treatment {
            ips += (s.outcome + c) / p;
        }
    }
    let out = RegretEquivalence {
        weighted_error: wset.weighted_error(policy) / n,
        ips_value: ips / n,
        total_mass: wset.total_weight() / n,
    };
    let gap = (out.weighted_error + out.ips_value - out.total_mass).abs();
    let tol = T::epsilon() * T::lit(1e3) * (T::one() + out.total_mass.abs()) * n.sqrt();
    if gap > tol {
        return Err(CdmError::Data(format!(
            "reduction identity violated: |error + ips - total| = {gap}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use crate::model::FnPolicy;
    use crate::policy::fixed_policy;

    fn wset(rows: &[(f64, u8, f64)]) -> WeightedClassificationSet<f64> {
        WeightedClassificationSet::new(
            rows.iter()
                .map(|&(x, l, w)| WeightedExample {
                    features: vec![x],
                    label: TreatmentLevel::new(l).unwrap(),
                    weight: w,
                })
                .collect(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn weights_follow_the_ips_formula() {
        let d: Dataset<f64> = Dataset::new(
            "d",
            vec![
                Sample::new(vec![0.0], TreatmentLevel::TREATED, 1.0).with_propensity(0.5),
                Sample::new(vec![0.0], TreatmentLevel::TREATED, 1.0).with_propensity(0.85),
                Sample::new(vec![0.0], TreatmentLevel::CONTROL, 1.0).with_propensity(0.75),
            ],
        )
        .unwrap();
        let w = to_weighted_classification(&d).unwrap();
        assert_eq!(w.examples()[0].weight, 2.0);
        assert!((w.examples()[1].weight - 1.0 / 0.85).abs() < 1e-15);
        assert_eq!(w.examples()[2].weight, 4.0);
        assert_eq!(w.outcome_offset(), 0.0);
        assert!(matches!(
            to_weighted_classification(&d.without_propensity()),
            Err(CdmError::MissingPropensity(_))
        ));
    }

    #[test]
    fn negative_outcomes_are_shifted() {
        let d = Dataset::new(
            "d",
            vec![
                Sample::new(vec![0.0], TreatmentLevel::TREATED, -3.0).with_propensity(0.5),
                Sample::new(vec![1.0], TreatmentLevel::CONTROL, 1.0).with_propensity(0.5),
            ],
        )
        .unwrap();
        let w = to_weighted_classification(&d).unwrap();
        assert_eq!(w.outcome_offset(), 3.0);
        assert_eq!(w.examples()[0].weight, 0.0);
        assert_eq!(w.examples()[1].weight, 8.0);
    }

    #[test]
    fn separable_pair_gives_a_stump() {
        let p = fit_policy_tree(
            &wset(&[(-1.0, 1, 10.0), (1.0, 0, 10.0)]),
            &TreeParams::with_depth(1),
        )
        .unwrap();
        assert_eq!(p.tree().depth(), 1);
        assert_eq!(p.assign(&[-1.0]), TreatmentLevel::TREATED);
        assert_eq!(p.assign(&[1.0]), TreatmentLevel::CONTROL);
        assert_eq!(p.score(&[-1.0]), Some(0.5));
    }

    #[test]
    fn identical_labels_give_a_constant_policy() {
        let p = fit_policy_tree(
            &wset(&[(-1.0, 1, 1.0), (0.0, 1, 2.0), (1.0, 1, 3.0)]),
            &TreeParams::with_depth(3),
        )
        .unwrap();
        assert_eq!(p.tree().depth(), 0);
        assert_eq!(p.assign(&[5.0]), TreatmentLevel::TREATED);
    }

    #[test]
    fn zero_weight_is_rejected() {
        assert!(fit_policy_tree(
            &wset(&[(0.0, 1, 0.0), (1.0, 0, 0.0)]),
            &TreeParams::default()
        )
        .is_err());
    }

    #[test]
    fn xor_needs_lookahead() {
        // No single split reduces the error; two levels classify perfectly.
        let mut rows = Vec::new();
        for (a, b) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
            let label = u8::from((a > 0.0) != (b > 0.0));
            rows.push(WeightedExample {
                features: vec![a, b],
                label: TreatmentLevel::new(label).unwrap(),
                weight: 1.0,
            });
        }
        let w = WeightedClassificationSet::new(rows, 0.0).unwrap();
        let p = fit_policy_tree(&w, &TreeParams::with_depth(2)).unwrap();
        assert_eq!(w.weighted_error(&p), 0.0);
        let greedy = fit_policy_tree(&w, &TreeParams::with_depth(1)).unwrap();
        assert_eq!(greedy.tree().depth(), 0);
    }

    #[test]
    fn min_leaf_limits_the_lookahead() {
        let rows: Vec<(f64, u8, f64)> = (0..8).map(|i| (i as f64, u8::from(i == 0), 1.0)).collect();
        let p = fit_policy_tree(
            &wset(&rows),
            &TreeParams {
                max_depth: 2,
                min_leaf: 2,
                ..TreeParams::default()
            },
        )
        .unwrap();
        for n in p.tree().nodes() {
            if let TreeNode::Leaf { n_samples, .. } = n {
                assert!(*n_samples >= 2);
            }
        }
    }

    #[test]
    fn equivalence_on_a_small_log() {
        let d = Dataset::new(
            "d",
            vec![
                Sample::new(vec![0.0], TreatmentLevel::TREATED, 1.0).with_propensity(0.3),
                Sample::new(vec![1.0], TreatmentLevel::CONTROL, -2.0).with_propensity(0.3),
                Sample::new(vec![2.0], TreatmentLevel::TREATED, 0.5).with_propensity(0.3),
            ],
        )
        .unwrap();
        let all = regret_equivalence_check(&d, &fixed_policy(TreatmentLevel::TREATED)).unwrap();
        let none = regret_equivalence_check(&d, &fixed_policy(TreatmentLevel::CONTROL)).unwrap();
        let split = regret_equivalence_check(
            &d,
            &FnPolicy(|x: &[f64]| TreatmentLevel::from_bool(x[0] > 0.5)),
        )
        .unwrap();
        for r in [all, none, split] {
            assert!((r.weighted_error + r.ips_value - all.total_mass).abs() < 1e-12);
        }
        assert!((all.weighted_error + none.weighted_error - all.total_mass).abs() < 1e-12);
    }
}
