//! Scoring abstractions: effect models, outcome models and policies.

use std::sync::Arc;

use crate::data::TreatmentLevel;
use crate::scalar::Scalar;

/// Estimate of the conditional average treatment effect `f(x)`.
pub trait EffectModel<T: Scalar>: Send + Sync {
    fn predict_effect(&self, x: &[T]) -> T;

    /// Feature width the model was trained on, if it has one.
    fn n_features(&self) -> Option<usize> {
        None
    }
}

/// Estimate of `E[Y(i) | X = x]` for one arm `i` (or for pooled data).
pub trait OutcomeModel<T: Scalar>: Send + Sync {
    fn predict_outcome(&self, x: &[T]) -> T;

    /// Arm the model was fitted on; `None` when fitted on all rows.
    fn arm(&self) -> Option<TreatmentLevel>;

    fn n_features(&self) -> Option<usize> {
        None
    }
}

/// Treatment assignment rule.
pub trait Policy<T: Scalar>: Send + Sync {
    fn assign(&self, x: &[T]) -> TreatmentLevel;

    /// Ranking score used by uplift curves; larger means "treat first".
    fn score(&self, _x: &[T]) -> Option<T> {
        None
    }

    fn n_features(&self) -> Option<usize> {
        None
    }
}

macro_rules! forward_pointer {
    ($trait:ident, $($ptr:ty),+) => {
        $(
            impl<T: Scalar, M: $trait<T> + ?Sized> $trait<T> for $ptr {
                forward_pointer!(@body $trait);
            }
        )+
    };
    (@body EffectModel) => {
        fn predict_effect(&self, x: &[T]) -> T { (**self).predict_effect(x) }
        fn n_features(&self) -> Option<usize> { (**self).n_features() }
    };
    (@body OutcomeModel) => {
        fn predict_outcome(&self, x: &[T]) -> T { (**self).predict_outcome(x) }
        fn arm(&self) -> Option<TreatmentLevel> { (**self).arm() }
        fn n_features(&self) -> Option<usize> { (**self).n_features() }
    };
    (@body Policy) => {
        fn assign(&self, x: &[T]) -> TreatmentLevel { (**self).assign(x) }
        fn score(&self, x: &[T]) -> Option<T> { (**self).score(x) }
        fn n_features(&self) -> Option<usize> { (**self).n_features() }
    };
}

forward_pointer!(EffectModel, &M, Box<M>, Arc<M>);
forward_pointer!(OutcomeModel, &M, Box<M>, Arc<M>);
forward_pointer!(Policy, &M, Box<M>, Arc<M>);

/// Effect model backed by a closure.
pub struct FnEffect<F>(pub F);

impl<T: Scalar, F: Fn(&[T]) -> T + Send + Sync> EffectModel<T> for FnEffect<F> {
    fn predict_effect(&self, x: &[T]) -> T {
        (self.0)(x)
    }
}

/// Outcome model backed by a closure, tagged with the arm it predicts.
pub struct FnOutcome<F> {
    pub predict: F,
    pub arm: Option<TreatmentLevel>,
}

impl<T: Scalar, F: Fn(&[T]) -> T + Send + Sync> OutcomeModel<T> for FnOutcome<F> {
    fn predict_outcome(&self, x: &[T]) -> T {
        (self.predict)(x)
    }

    fn arm(&self) -> Option<TreatmentLevel> {
        self.arm
    }
}

/// Policy backed by a closure.
pub struct FnPolicy<F>(pub F);

impl<T: Scalar, F: Fn(&[T]) -> TreatmentLevel + Send + Sync> Policy<T> for FnPolicy<F> {
    fn assign(&self, x: &[T]) -> TreatmentLevel {
        (self.0)(x)
    }
}
