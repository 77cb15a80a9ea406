use super::engine::{grow, LeafConstraint, LeafStats, SplitProblem};
use super::{Tree, TreeParams};
use crate::data::{Dataset, TreatmentLevel};
use crate::error::{CdmError, Result};
use crate::model::OutcomeModel;
use crate::scalar::Scalar;

/// CART regression tree predicting the outcome (a conversion probability for
/// binary outcomes).
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTree<T> {
    pub(crate) tree: Tree<T>,
    pub(crate) arm: Option<TreatmentLevel>,
}

impl<T: Scalar> OutcomeTree<T> {
    pub fn tree(&self) -> &Tree<T> {
        &self.tree
    }

    pub fn from_tree(tree: Tree<T>, arm: Option<TreatmentLevel>) -> Self {
        OutcomeTree { tree, arm }
    }
}

impl<T: Scalar> OutcomeModel<T> for OutcomeTree<T> {
    fn predict_outcome(&self, x: &[T]) -> T {
        self.tree.predict(x)
    }

    fn arm(&self) -> Option<TreatmentLevel> {
        self.arm
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.tree.n_features())
    }
}

/// Fits a greedy squared-error tree on `train`, restricted to one arm when
/// `arm_filter` is set. Leaves predict the mean outcome.
pub fn fit_outcome_tree<T: Scalar>(
    train: &Dataset<T>,
    arm_filter: Option<TreatmentLevel>,
    params: &TreeParams,
) -> Result<OutcomeTree<T>> {
    params.validate()?;
    if train.n_features() == 0 {
        return Err(CdmError::Precondition(
            "outcome tree needs at least one feature".into(),
        ));
    }
    let samples = train.samples();
    let idx: Vec<usize> = (0..samples.len())
        .filter(|&i| arm_filter.is_none_or(|a| samples[i].treatment == a))
        .collect();
    if idx.is_empty() {
        return Err(CdmError::Precondition(format!(
            "no training rows in arm {}",
            arm_filter.map_or(0, |a| a.index())
        )));
    }
    if idx.len() < 2 * params.min_leaf {
        return Err(CdmError::Precondition(format!(
            "outcome tree needs at least 2 * min_leaf = {} rows, got {}",
            2 * params.min_leaf,
            idx.len()
        )));
    }
    let targets: Vec<T> = samples.iter().map(|s| s.outcome).collect();
    let problem = SplitProblem {
        samples,
        targets: &targets,
        constraint: LeafConstraint::Count(params.min_leaf),
        n_features: train.n_features(),
    };
    let leaf = |node: &[usize]| {
        let sum = node.iter().fold(T::zero(), |acc, &i| acc + targets[i]);
        LeafStats {
            estimate: sum / T::from_usize_lossy(node.len()),
            n_samples: node.len(),
            n_treated: None,
        }
    };
    let tree = grow(&problem, idx, params, &leaf)?;
    Ok(OutcomeTree {
        tree,
        arm: arm_filter,
    })
}
