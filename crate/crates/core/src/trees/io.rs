//! JSON model documents shared across CLI invocations.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{predict_effect_batch, predict_outcome_batch, CausalTree, OutcomeTree, Tree, TwoModel};
use crate::data::{Dataset, TreatmentLevel};
use crate::error::{CdmError, Result};
use crate::model::{EffectModel, Policy};
use crate::policy::{outcome_policy, threshold_policy};
use crate::reduction::PolicyTree;
use crate::scalar::Scalar;

pub const MODEL_FORMAT_VERSION: &str = "cdm-model/1";

/// Any fitted model, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(deserialize = "T: Scalar"))]
pub enum SavedModel<T> {
    Outcome {
        arm: Option<TreatmentLevel>,
        tree: Tree<T>,
    },
    Causal {
        tree: Tree<T>,
    },
    TwoModel {
        control: Tree<T>,
        treated: Tree<T>,
    },
    Policy {
        tree: Tree<T>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
struct Document<T> {
    format_version: String,
    #[serde(flatten)]
    model: SavedModel<T>,
}

impl<T: Scalar> SavedModel<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Outcome { .. } => "outcome",
            SavedModel::Causal { .. } => "causal",
            SavedModel::TwoModel { .. } => "two_model",
            SavedModel::Policy { .. } => "policy",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SavedModel::Outcome { tree, .. }
            | SavedModel::Causal { tree }
            | SavedModel::Policy { tree } => tree.validate(),
            SavedModel::TwoModel { control, treated } => {
                control.validate()?;
                treated.validate()?;
                if control.n_features() != treated.n_features() {
                    return Err(CdmError::Config(
                        "two-model arms disagree on feature width".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = Document {
            format_version: MODEL_FORMAT_VERSION.to_string(),
            model: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document<T> = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(CdmError::Config(format!(
                "unsupported model format `{}` (expected `{MODEL_FORMAT_VERSION}`)",
                doc.format_version
            )));
        }
        doc.model.validate()?;
        Ok(doc.model)
    }
}

impl<T: Scalar> From<OutcomeTree<T>> for SavedModel<T> {
    fn from(m: OutcomeTree<T>) -> Self {
        SavedModel::Outcome {
            arm: m.arm,
            tree: m.tree,
        }
    }
}

impl<T: Scalar> From<CausalTree<T>> for SavedModel<T> {
    fn from(m: CausalTree<T>) -> Self {
        SavedModel::Causal { tree: m.tree }
    }
}

impl<T: Scalar> From<TwoModel<T>> for SavedModel<T> {
    fn from(m: TwoModel<T>) -> Self {
        SavedModel::TwoModel {
            control: m.control.tree,
            treated: m.treated.tree,
        }
    }
}

impl<T: Scalar> From<PolicyTree<T>> for SavedModel<T> {
    fn from(m: PolicyTree<T>) -> Self {
        SavedModel::Policy { tree: m.tree }
    }
}

/// A loaded model in the form the metrics consume.
pub enum Fitted<T> {
    Outcome(OutcomeTree<T>),
    Effect(Box<dyn EffectModel<T>>),
    Policy(PolicyTree<T>),
}

impl<T: Scalar> SavedModel<T> {
    pub fn into_fitted(self) -> Fitted<T> {
        match self {
            SavedModel::Outcome { arm, tree } => Fitted::Outcome(OutcomeTree::from_tree(tree, arm)),
            SavedModel::Causal { tree } => Fitted::Effect(Box::new(CausalTree::from_tree(tree))),
            SavedModel::TwoModel { control, treated } => {
                Fitted::Effect(Box::new(TwoModel::from_arms(
                    OutcomeTree::from_tree(control, Some(TreatmentLevel::CONTROL)),
                    OutcomeTree::from_tree(treated, Some(TreatmentLevel::TREATED)),
                )))
            }
            SavedModel::Policy { tree } => Fitted::Policy(PolicyTree::from_tree(tree)),
        }
    }
}

impl<T: Scalar> Fitted<T> {
    pub fn effect_model(&self) -> Option<&dyn EffectModel<T>> {
        match self {
            Fitted::Effect(m) => Some(m.as_ref()),
            _ => None,
        }
    }

    /// Decision rule: effect models and outcome models treat above `tau`;
    /// policy trees ignore it.
    pub fn policy(&self, tau: T) -> Result<Box<dyn Policy<T> + '_>> {
        Ok(match self {
            Fitted::Outcome(m) => Box::new(outcome_policy(m, tau)?),
            Fitted::Effect(m) => Box::new(threshold_policy(m.as_ref(), tau)?),
            Fitted::Policy(m) => Box::new(m),
        })
    }

    /// Per-unit ranking scores: predicted outcome, predicted effect or leaf
    /// treat share minus one half.
    pub fn scores(&self, dataset: &Dataset<T>) -> Result<Vec<T>> {
        match self {
            Fitted::Outcome(m) => predict_outcome_batch(m, dataset),
            Fitted::Effect(m) => predict_effect_batch(m.as_ref(), dataset),
            Fitted::Policy(m) => {
                if m.tree().n_features() != dataset.n_features() {
                    return Err(CdmError::Precondition(format!(
                        "model expects {} features, dataset has {}",
                        m.tree().n_features(),
                        dataset.n_features()
                    )));
                }
                Ok(dataset
                    .samples()
                    .iter()
                    .map(|s| m.score(&s.features).expect("policy trees score"))
                    .collect())
            }
        }
    }
}

pub fn save_model<T: Scalar>(model: &SavedModel<T>, path: &Path) -> Result<()> {
    fs::write(path, model.to_json()? + "\n").map_err(|e| CdmError::io(path, e))
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<SavedModel<T>> {
    let text = fs::read_to_string(path).map_err(|e| CdmError::io(path, e))?;
    SavedModel::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::TreeNode;

    #[test]
    fn json_round_trip_and_kind_tag() {
        let tree = Tree::from_nodes(
            1,
            vec![TreeNode::Leaf {
                estimate: 0.25f64,
                n_samples: 10,
                n_treated: Some(4),
            }],
        )
        .unwrap();
        let m = SavedModel::Outcome {
            arm: Some(TreatmentLevel::CONTROL),
            tree,
        };
        let text = m.to_json().unwrap();
        assert!(text.contains("\"kind\": \"outcome\""));
        assert!(text.contains("\"format_version\": \"cdm-model/1\""));
        assert_eq!(SavedModel::<f64>::from_json(&text).unwrap(), m);
    }

    #[test]
    fn rejects_unknown_format() {
        let text = r#"{"format_version":"x","kind":"causal","tree":{"n_features":1,"nodes":[{"type":"leaf","estimate":1.0,"n_samples":1}]}}"#;
        assert!(SavedModel::<f64>::from_json(text).is_err());
    }
}
