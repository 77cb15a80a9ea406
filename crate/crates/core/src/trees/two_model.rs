use super::outcome::{fit_outcome_tree, OutcomeTree};
use super::TreeParams;
use crate::data::{Dataset, TreatmentLevel};
use crate::error::Result;
use crate::model::{EffectModel, OutcomeModel};
use crate::scalar::Scalar;

/// T-learner: one outcome tree per arm, effect = treated minus control.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModel<T> {
    pub(crate) control: OutcomeTree<T>,
    pub(crate) treated: OutcomeTree<T>,
}

impl<T: Scalar> TwoModel<T> {
    pub fn control(&self) -> &OutcomeTree<T> {
        &self.control
    }

    pub fn treated(&self) -> &OutcomeTree<T> {
        &self.treated
    }

    pub fn from_arms(control: OutcomeTree<T>, treated: OutcomeTree<T>) -> Self {
        TwoModel { control, treated }
    }
}

impl<T: Scalar> EffectModel<T> for TwoModel<T> {
    fn predict_effect(&self, x: &[T]) -> T {
        self.treated.predict_outcome(x) - self.control.predict_outcome(x)
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.control.tree.n_features())
    }
}

pub fn fit_two_model<T: Scalar>(train: &Dataset<T>, params: &TreeParams) -> Result<TwoModel<T>> {
    let control = fit_outcome_tree(train, Some(TreatmentLevel::CONTROL), params)?;
    let treated = fit_outcome_tree(train, Some(TreatmentLevel::TREATED), params)?;
    Ok(TwoModel { control, treated })
}
