//! Grid search over depth and leaf size by k-fold cross-validation.

use serde::{Deserialize, Serialize};

use super::{fit_causal_tree, fit_outcome_tree, TreeParams};
use crate::data::{Dataset, TreatmentLevel};
use crate::error::{CdmError, Result};
use crate::eval::effect_mse;
use crate::ingest::kfold;
use crate::model::OutcomeModel;
use crate::scalar::{mean_and_se, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub max_depth: Vec<usize>,
    pub min_leaf: Vec<usize>,
}

impl Default for ParamGrid {
    fn default() -> Self {
        ParamGrid {
            max_depth: vec![3, 5, 7],
            min_leaf: vec![100, 1000],
        }
    }
}

/// Learner being tuned and the loss it is scored by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TunedMethod {
    /// Held-out squared error of the outcome, on rows of `arm` if set.
    OutcomeTree { arm: Option<TreatmentLevel> },
    /// Held-out transformed-outcome effect MSE.
    CausalTree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Mean held-out loss over folds; `None` when some fold could not be fit.
    pub mean_loss: Option<f64>,
    pub std_error: Option<f64>,
}

fn fold_loss<T: Scalar>(
    method: TunedMethod,
    train: &Dataset<T>,
    test: &Dataset<T>,
    params: &TreeParams,
) -> Result<f64> {
    match method {
        TunedMethod::OutcomeTree { arm } => {
            let model = fit_outcome_tree(train, arm, params)?;
            let rows: Vec<f64> = test
                .samples()
                .iter()
                .filter(|s| arm.is_none_or(|a| s.treatment == a))
                .map(|s| {
                    let d = s.outcome - model.predict_outcome(&s.features);
                    (d * d).as_f64()
                })
                .collect();
            if rows.is_empty() {
                return Err(CdmError::Precondition(
                    "test fold has no rows of the fitted arm".into(),
                ));
            }
            Ok(mean_and_se(&rows).0)
        }
        TunedMethod::CausalTree => Ok(effect_mse(&fit_causal_tree(train, params)?, test)?.value),
    }
}

/// Scores every grid point by k-fold CV and returns the best parameters
/// (lowest mean loss, first in grid order on ties) with all scores.
/// Other fields of `base` are kept.
pub fn cross_validate<T: Scalar>(
    data: &Dataset<T>,
    method: TunedMethod,
    base: &TreeParams,
    grid: &ParamGrid,
    k: usize,
    seed: u64,
) -> Result<(TreeParams, Vec<CvScore>)> {
    if grid.max_depth.is_empty() || grid.min_leaf.is_empty() {
        return Err(CdmError::Config("parameter grid is empty".into()));
    }
    let folds = kfold(data, k, seed)?;
    let mut scores = Vec::new();
    let mut best: Option<(f64, TreeParams)> = None;
    for &max_depth in &grid.max_depth {
        for &min_leaf in &grid.min_leaf {
            let params = TreeParams {
                max_depth,
                min_leaf,
                ..base.clone()
            };
            params.validate()?;
            let losses: Result<Vec<f64>> = folds
                .iter()
                .map(|(train, test)| fold_loss(method, train, test, &params))
                .collect();
            let (mean_loss, std_error) = match losses {
                Ok(l) => {
                    let (m, se) = mean_and_se(&l);
                    (Some(m), Some(se))
                }
                Err(CdmError::Precondition(_)) => (None, None),
                Err(e) => return Err(e),
            };
            if let Some(m) = mean_loss {
                if best.as_ref().is_none_or(|(b, _)| m < *b) {
                    best = Some((m, params));
                }
            }
            scores.push(CvScore {
                max_depth,
                min_leaf,
                mean_loss,
                std_error,
            });
        }
    }
    let (_, params) = best
        .ok_or_else(|| CdmError::Precondition("no grid point could be fit on every fold".into()))?;
    Ok((params, scores))
}
