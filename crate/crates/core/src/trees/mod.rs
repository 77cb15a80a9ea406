//! From-scratch tree learners: outcome trees, causal trees and the
//! two-model effect learner.
//!
//! All trees share one representation ([`Tree`]) and one greedy SSE engine.
//! Candidate thresholds are midpoints between consecutive distinct feature
//! values within a node; `x[feature] <= threshold` goes left. Among equal
//! gains the lowest feature index wins, then the lowest threshold.

mod causal;
mod engine;
mod io;
mod outcome;
mod tune;
mod two_model;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{CdmError, Result};
use crate::model::{EffectModel, OutcomeModel};
use crate::scalar::Scalar;

pub use causal::{fit_causal_tree, CausalTree};
pub use io::{load_model, save_model, Fitted, SavedModel, MODEL_FORMAT_VERSION};
pub use outcome::{fit_outcome_tree, OutcomeTree};
pub use tune::{cross_validate, CvScore, ParamGrid, TunedMethod};
pub use two_model::{fit_two_model, TwoModel};

pub(crate) use engine::{accept_gain, midpoint};

fn default_max_depth() -> usize {
    3
}

fn default_min_leaf() -> usize {
    1
}

/// Hyperparameters shared by every tree learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeParams {
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    /// Minimum samples per leaf; per arm for causal trees.
    #[serde(default = "default_min_leaf")]
    pub min_leaf: usize,
    /// Smallest impurity reduction a split must achieve.
    #[serde(default)]
    pub min_split_gain: f64,
    /// Causal trees only: pick splits on one half, estimate leaves on the other.
    #[serde(default)]
    pub honest: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: default_max_depth(),
            min_leaf: default_min_leaf(),
            min_split_gain: 0.0,
            honest: false,
            seed: 0,
        }
    }
}

impl TreeParams {
    pub fn with_depth(max_depth: usize) -> Self {
        TreeParams {
            max_depth,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_leaf == 0 {
            return Err(CdmError::Config("min_leaf must be >= 1".into()));
        }
        if !(self.min_split_gain >= 0.0 && self.min_split_gain.is_finite()) {
            return Err(CdmError::Config(
                "min_split_gain must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode<T> {
    Internal {
        feature_index: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        estimate: T,
        n_samples: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_treated: Option<usize>,
    },
}

/// Binary tree stored as a node vector with the root at index 0. Children
/// always come after their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T> {
    n_features: usize,
    nodes: Vec<TreeNode<T>>,
}

impl<T: Scalar> Tree<T> {
    pub(crate) fn from_nodes(n_features: usize, nodes: Vec<TreeNode<T>>) -> Result<Self> {
        let tree = Tree { n_features, nodes };
        tree.validate()?;
        Ok(tree)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(CdmError::Config("tree has no nodes".into()));
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        for (i, node) in self.nodes.iter().enumerate() {
            if let TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
            } = node
            {
                if *feature_index >= self.n_features || !threshold.is_finite() {
                    return Err(CdmError::Config(format!("node {i}: invalid split")));
                }
                for &c in [left, right] {
                    if c <= i || c >= self.nodes.len() || seen[c] {
                        return Err(CdmError::Config(format!("node {i}: invalid child {c}")));
                    }
                    seen[c] = true;
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(CdmError::Config("tree has unreachable nodes".into()));
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn nodes(&self) -> &[TreeNode<T>] {
        &self.nodes
    }

    /// Index of the leaf `x` falls into.
    pub fn leaf_index(&self, x: &[T]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { .. } => return i,
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[*feature_index] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn predict(&self, x: &[T]) -> T {
        match &self.nodes[self.leaf_index(x)] {
            TreeNode::Leaf { estimate, .. } => *estimate,
            TreeNode::Internal { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[TreeNode<T>], i: usize) -> usize {
            match &nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Internal { left, right, .. } => {
                    1 + walk(nodes, *left).max(walk(nodes, *right))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub(crate) fn leaf_mut(
        &mut self,
        i: usize,
    ) -> Option<(&mut T, &mut usize, &mut Option<usize>)> {
        match &mut self.nodes[i] {
            TreeNode::Leaf {
                estimate,
                n_samples,
                n_treated,
            } => Some((estimate, n_samples, n_treated)),
            TreeNode::Internal { .. } => None,
        }
    }
}

fn check_width(expected: Option<usize>, dataset_width: usize) -> Result<()> {
    match expected {
        Some(w) if w != dataset_width => Err(CdmError::Precondition(format!(
            "model expects {w} features, dataset has {dataset_width}"
        ))),
        _ => Ok(()),
    }
}

/// Effect predictions for every sample, in dataset order.
pub fn predict_effect_batch<T: Scalar, M: EffectModel<T> + ?Sized>(
    model: &M,
    dataset: &Dataset<T>,
) -> Result<Vec<T>> {
    check_width(model.n_features(), dataset.n_features())?;
    Ok(dataset
        .samples()
        .iter()
        .map(|s| model.predict_effect(&s.features))
        .collect())
}

/// Outcome predictions for every sample, in dataset order.
pub fn predict_outcome_batch<T: Scalar, M: OutcomeModel<T> + ?Sized>(
    model: &M,
    dataset: &Dataset<T>,
) -> Result<Vec<T>> {
    check_width(model.n_features(), dataset.n_features())?;
    Ok(dataset
        .samples()
        .iter()
        .map(|s| model.predict_outcome(&s.features))
        .collect())
}
