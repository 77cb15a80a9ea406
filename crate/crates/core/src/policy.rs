//! Policies built from scored models.

use crate::data::TreatmentLevel;
use crate::error::{CdmError, Result};
use crate::model::{EffectModel, OutcomeModel, Policy};
use crate::scalar::Scalar;

fn check_tau<T: Scalar>(tau: T) -> Result<()> {
    if tau.is_finite() {
        Ok(())
    } else {
        Err(CdmError::Config(format!(
            "threshold must be finite, got {tau}"
        )))
    }
}

/// Treats when the predicted effect is strictly above `tau`.
#[derive(Debug, Clone)]
pub struct ThresholdPolicy<M, T> {
    model: M,
    tau: T,
}

impl<M, T: Scalar> ThresholdPolicy<M, T> {
    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn tau(&self) -> T {
        self.tau
    }
}

impl<T: Scalar, M: EffectModel<T>> Policy<T> for ThresholdPolicy<M, T> {
    fn assign(&self, x: &[T]) -> TreatmentLevel {
        TreatmentLevel::from_bool(self.model.predict_effect(x) > self.tau)
    }

    fn score(&self, x: &[T]) -> Option<T> {
        Some(self.model.predict_effect(x) - self.tau)
    }

    fn n_features(&self) -> Option<usize> {
        self.model.n_features()
    }
}

/// `assign(x) = 1` iff `predict_effect(x) > tau`; ties go to control.
pub fn threshold_policy<T: Scalar, M: EffectModel<T>>(
    model: M,
    tau: T,
) -> Result<ThresholdPolicy<M, T>> {
    check_tau(tau)?;
    Ok(ThresholdPolicy { model, tau })
}

/// Targets units whose predicted outcome exceeds `tau` (proxy targeting).
#[derive(Debug, Clone)]
pub struct OutcomePolicy<M, T> {
    model: M,
    tau: T,
}

impl<M, T: Scalar> OutcomePolicy<M, T> {
    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn tau(&self) -> T {
        self.tau
    }
}

impl<T: Scalar, M: OutcomeModel<T>> Policy<T> for OutcomePolicy<M, T> {
    fn assign(&self, x: &[T]) -> TreatmentLevel {
        TreatmentLevel::from_bool(self.model.predict_outcome(x) > self.tau)
    }

    fn score(&self, x: &[T]) -> Option<T> {
        Some(self.model.predict_outcome(x))
    }

    fn n_features(&self) -> Option<usize> {
        self.model.n_features()
    }
}

pub fn outcome_policy<T: Scalar, M: OutcomeModel<T>>(
    model: M,
    tau: T,
) -> Result<OutcomePolicy<M, T>> {
    check_tau(tau)?;
    Ok(OutcomePolicy { model, tau })
}

/// Assigns the same level to everyone (treat-all / treat-none baselines).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPolicy {
    level: TreatmentLevel,
}

impl<T: Scalar> Policy<T> for FixedPolicy {
    fn assign(&self, _x: &[T]) -> TreatmentLevel {
        self.level
    }

    fn score(&self, _x: &[T]) -> Option<T> {
        Some(T::zero())
    }
}

pub fn fixed_policy(level: TreatmentLevel) -> FixedPolicy {
    FixedPolicy { level }
}

/// Threshold under which exactly the top `ceil(fraction * N)` of `scores`
/// lie strictly above it, provided scores are distinct.
///
/// Used with [`outcome_policy`] or [`threshold_policy`] to turn a score into
/// a "treat the top q" rule calibrated on a reference dataset.
pub fn top_fraction_threshold<T: Scalar>(scores: &[T], fraction: f64) -> Result<T> {
    if scores.is_empty() {
        return Err(CdmError::Config(
            "cannot calibrate a threshold on no scores".into(),
        ));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(CdmError::Config(format!(
            "fraction {fraction} outside [0, 1]"
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(CdmError::Config("scores must be finite".into()));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let k = (fraction * sorted.len() as f64).ceil() as usize;
    if k == 0 {
        return Ok(sorted[0]);
    }
    if k >= sorted.len() {
        let min = sorted[sorted.len() - 1];
        return Ok(min - min.abs() - T::one());
    }
    Ok(sorted[k])
}
