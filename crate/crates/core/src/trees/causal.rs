use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::engine::{grow, LeafConstraint, LeafStats, SplitProblem};
use super::{Tree, TreeParams};
use crate::data::{difference_in_means, Dataset, Sample};
use crate::error::{CdmError, Result};
use crate::eval::transformed_outcome;
use crate::model::EffectModel;
use crate::scalar::Scalar;

/// Tree whose leaves hold treatment-effect estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalTree<T> {
    pub(crate) tree: Tree<T>,
}

impl<T: Scalar> CausalTree<T> {
    pub fn tree(&self) -> &Tree<T> {
        &self.tree
    }

    pub fn from_tree(tree: Tree<T>) -> Self {
        CausalTree { tree }
    }
}

impl<T: Scalar> EffectModel<T> for CausalTree<T> {
    fn predict_effect(&self, x: &[T]) -> T {
        self.tree.predict(x)
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.tree.n_features())
    }
}

/// Hajek (normalized) inverse-propensity-weighted difference in means.
fn ipw_difference<T: Scalar>(samples: &[Sample<T>], idx: &[usize]) -> Option<T> {
    let (mut wy1, mut w1, mut wy0, mut w0) = (T::zero(), T::zero(), T::zero(), T::zero());
    for &i in idx {
        let s = &samples[i];
        let p = s.arm_probability()?;
        let w = T::one() / p;
        if s.treatment.is_treated() {
            wy1 += w * s.outcome;
            w1 += w;
        } else {
            wy0 += w * s.outcome;
            w0 += w;
        }
    }
    if w1 == T::zero() || w0 == T::zero() {
        return None;
    }
    Some(wy1 / w1 - wy0 / w0)
}

fn leaf_effect<T: Scalar>(samples: &[Sample<T>], idx: &[usize], constant_e: bool) -> Option<T> {
    if constant_e {
        difference_in_means(samples, idx)
    } else {
        ipw_difference(samples, idx)
    }
}

fn count_treated<T>(samples: &[Sample<T>], idx: &[usize]) -> usize {
    idx.iter()
        .filter(|&&i| samples[i].treatment.is_treated())
        .count()
}

fn check_both_arms<T>(samples: &[Sample<T>], idx: &[usize], what: &str) -> Result<()> {
    let n1 = count_treated(samples, idx);
    if n1 == 0 || n1 == idx.len() {
        return Err(CdmError::Precondition(format!(
            "causal tree: {what} contains only one treatment arm"
        )));
    }
    Ok(())
}

/// Fits a causal tree.
///
/// Splits minimize the squared error of the transformed outcome
/// `Y* = Y (T - e) / (e (1 - e))` around each node's mean; leaves estimate the
/// effect as the difference in arm means (propensity-weighted when
/// propensities vary). Children must keep `min_leaf` samples of each arm.
pub fn fit_causal_tree<T: Scalar>(
    train: &Dataset<T>,
    params: &TreeParams,
) -> Result<CausalTree<T>> {
    params.validate()?;
    if !train.has_propensities() {
        return Err(CdmError::MissingPropensity(
            "causal tree needs per-sample or constant propensities".into(),
        ));
    }
    let samples = train.samples();
    let all: Vec<usize> = (0..samples.len()).collect();
    check_both_arms(samples, &all, "the training set")?;
    let targets = samples
        .iter()
        .map(|s| transformed_outcome(s.outcome, s.treatment, s.propensity.expect("checked")))
        .collect::<Result<Vec<T>>>()?;
    let constant_e = train.constant_propensity().is_some();
    let problem = SplitProblem {
        samples,
        targets: &targets,
        constraint: LeafConstraint::PerArm(params.min_leaf),
        n_features: train.n_features(),
    };
    let leaf = |node: &[usize]| LeafStats {
        // Grown nodes always hold both arms: the root is checked and every
        // accepted split keeps min_leaf >= 1 of each.
        estimate: leaf_effect(samples, node, constant_e).unwrap_or_else(T::zero),
        n_samples: node.len(),
        n_treated: Some(count_treated(samples, node)),
    };

    if !params.honest {
        let tree = grow(&problem, all, params, &leaf)?;
        return Ok(CausalTree { tree });
    }

    let mut order = all;
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(params.seed));
    let estimation = order.split_off(order.len() / 2);
    let mut structure = order;
    structure.sort_unstable();
    check_both_arms(samples, &structure, "the honest split half")?;
    check_both_arms(samples, &estimation, "the honest estimation half")?;
    let mut tree = grow(&problem, structure, params, &leaf)?;

    let mut by_leaf: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes().len()];
    let mut estimation = estimation;
    estimation.sort_unstable();
    for i in estimation {
        by_leaf[tree.leaf_index(&samples[i].features)].push(i);
    }
    for (leaf_id, members) in by_leaf.iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if let Some(effect) = leaf_effect(samples, members, constant_e) {
            let (estimate, n_samples, n_treated) =
                tree.leaf_mut(leaf_id).expect("routed to a leaf");
            *estimate = effect;
            *n_samples = members.len();
            *n_treated = Some(count_treated(samples, members));
        }
    }
    Ok(CausalTree { tree })
}
