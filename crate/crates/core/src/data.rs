//! Samples, potential outcomes and immutable datasets.

use serde::{Deserialize, Serialize};

use crate::error::{CdmError, Result};
use crate::scalar::{ordered_sum, Scalar};

/// Number of treatment levels supported by every operation.
pub const N_LEVELS: usize = 2;

/// Index of a treatment arm; `0` is control ("not treat").
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TreatmentLevel(u8);

impl TreatmentLevel {
    pub const CONTROL: TreatmentLevel = TreatmentLevel(0);
    pub const TREATED: TreatmentLevel = TreatmentLevel(1);

    pub fn new(index: u8) -> Result<Self> {
        if (index as usize) < N_LEVELS {
            Ok(TreatmentLevel(index))
        } else {
            Err(CdmError::Data(format!(
                "treatment level {index} out of range (n_levels = {N_LEVELS})"
            )))
        }
    }

    pub fn from_bool(treated: bool) -> Self {
        if treated {
            Self::TREATED
        } else {
            Self::CONTROL
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_treated(self) -> bool {
        self.0 == 1
    }

    /// The other arm of a binary treatment.
    pub fn flipped(self) -> Self {
        TreatmentLevel(1 - self.0)
    }
}

/// Covariates of a single unit.
pub type FeatureVector<T> = Vec<T>;

/// Ground truth attached to synthetic samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oracle<T> {
    /// `Y(0)` and `Y(1)`.
    pub potential_outcomes: [T; N_LEVELS],
    /// Conditional average effect for this unit, `E[Y(1) - Y(0) | unit]`.
    /// Equals `Y(1) - Y(0)` for continuous outcomes; for binary outcomes it is
    /// the difference of success probabilities.
    pub true_cate: T,
    /// Assignment probability actually used when the sample was generated,
    /// kept even when the observable propensity is hidden.
    pub true_propensity: Option<T>,
}

impl<T: Scalar> Oracle<T> {
    pub fn y0(&self) -> T {
        self.potential_outcomes[0]
    }

    pub fn y1(&self) -> T {
        self.potential_outcomes[1]
    }

    pub fn outcome(&self, level: TreatmentLevel) -> T {
        self.potential_outcomes[level.index()]
    }

    pub fn best_outcome(&self) -> T {
        self.y0().max(self.y1())
    }
}

/// One observed unit. Synthetic samples also carry an [`Oracle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub features: FeatureVector<T>,
    pub treatment: TreatmentLevel,
    pub outcome: T,
    /// `P(T = 1 | X)` under the logging mechanism, when known.
    pub propensity: Option<T>,
    pub oracle: Option<Oracle<T>>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(features: Vec<T>, treatment: TreatmentLevel, outcome: T) -> Self {
        Sample {
            features,
            treatment,
            outcome,
            propensity: None,
            oracle: None,
        }
    }

    pub fn with_propensity(mut self, propensity: T) -> Self {
        self.propensity = Some(propensity);
        self
    }

    /// Builds a synthetic sample whose observed outcome is read off the
    /// potential outcomes.
    pub fn synthetic(
        features: Vec<T>,
        treatment: TreatmentLevel,
        potential_outcomes: [T; N_LEVELS],
        true_cate: T,
    ) -> Self {
        Sample {
            features,
            treatment,
            outcome: potential_outcomes[treatment.index()],
            propensity: None,
            oracle: Some(Oracle {
                potential_outcomes,
                true_cate,
                true_propensity: None,
            }),
        }
    }

    /// Probability of the logged arm, `e` for treated and `1 - e` for control.
    pub fn arm_probability(&self) -> Option<T> {
        self.propensity.map(|e| {
            if self.treatment.is_treated() {
                e
            } else {
                T::one() - e
            }
        })
    }

    fn validate(&self, n_features: usize, position: usize) -> Result<()> {
        let bad = |msg: String| Err(CdmError::Data(format!("sample {position}: {msg}")));
        if self.features.len() != n_features {
            return bad(format!(
                "expected {n_features} features, found {}",
                self.features.len()
            ));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return bad("non-finite feature value".into());
        }
        if !self.outcome.is_finite() {
            return bad("non-finite outcome".into());
        }
        if let Some(e) = self.propensity {
            if !(e > T::zero() && e < T::one()) {
                return bad(format!("propensity {e} outside (0, 1)"));
            }
        }
        if let Some(o) = &self.oracle {
            if o.potential_outcomes.iter().any(|v| !v.is_finite()) || !o.true_cate.is_finite() {
                return bad("non-finite potential outcome".into());
            }
            if o.outcome(self.treatment) != self.outcome {
                return bad(
                    "observed outcome differs from potential outcome of the logged arm".into(),
                );
            }
        }
        Ok(())
    }
}

/// Immutable, non-empty collection of samples sharing one feature width.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    samples: Vec<Sample<T>>,
    n_features: usize,
    name: String,
    is_synthetic: bool,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(name: impl Into<String>, samples: Vec<Sample<T>>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| CdmError::Data("dataset must contain at least one sample".into()))?;
        let n_features = first.features.len();
        for (i, s) in samples.iter().enumerate() {
            s.validate(n_features, i)?;
        }
        let is_synthetic = samples.iter().all(|s| s.oracle.is_some());
        Ok(Dataset {
            samples,
            n_features,
            name: name.into(),
            is_synthetic,
        })
    }

    pub fn samples(&self) -> &[Sample<T>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_levels(&self) -> usize {
        N_LEVELS
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// True when every sample carries potential outcomes.
    pub fn is_synthetic(&self) -> bool {
        self.is_synthetic
    }

    pub fn has_propensities(&self) -> bool {
        self.samples.iter().all(|s| s.propensity.is_some())
    }

    /// The shared propensity when every sample logs the same one.
    pub fn constant_propensity(&self) -> Option<T> {
        let e = self.samples[0].propensity?;
        self.samples
            .iter()
            .all(|s| s.propensity == Some(e))
            .then_some(e)
    }

    pub fn n_treated(&self) -> usize {
        self.samples
            .iter()
            .filter(|s| s.treatment.is_treated())
            .count()
    }

    pub fn treated_fraction(&self) -> f64 {
        self.n_treated() as f64 / self.len() as f64
    }

    /// Mean of `Y(1) - Y(0)` over units, for synthetic data.
    pub fn oracle_ate(&self) -> Option<T> {
        if !self.is_synthetic {
            return None;
        }
        let total = ordered_sum(self.samples.iter().map(|s| {
            let o = s.oracle.as_ref().expect("synthetic");
            o.y1() - o.y0()
        }));
        Some(total / T::from_usize_lossy(self.len()))
    }

    /// Oracle records in sample order, or an error naming `what` when the
    /// dataset is not synthetic.
    pub fn oracles(&self, what: &'static str) -> Result<Vec<&Oracle<T>>> {
        if !self.is_synthetic {
            return Err(CdmError::NotSynthetic(what));
        }
        Ok(self
            .samples
            .iter()
            .map(|s| s.oracle.as_ref().expect("synthetic"))
            .collect())
    }

    /// Per-sample logged-arm probabilities, or an error naming `what`.
    pub fn arm_probabilities(&self, what: &str) -> Result<Vec<T>> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.arm_probability().ok_or_else(|| {
                    CdmError::MissingPropensity(format!(
                        "{what}: sample {i} has no propensity; declare a propensity column or a constant propensity"
                    ))
                })
            })
            .collect()
    }

    /// New dataset made of the samples at `indices`, in that order.
    pub fn select(&self, indices: &[usize], name: impl Into<String>) -> Result<Self> {
        let samples = indices.iter().map(|&i| self.samples[i].clone()).collect();
        Dataset::new(name, samples)
    }

    /// Samples assigned to one arm.
    pub fn filter_arm(&self, arm: TreatmentLevel) -> Result<Self> {
        let samples: Vec<_> = self
            .samples
            .iter()
            .filter(|s| s.treatment == arm)
            .cloned()
            .collect();
        if samples.is_empty() {
            return Err(CdmError::Precondition(format!(
                "no samples in arm {} of `{}`",
                arm.index(),
                self.name
            )));
        }
        Dataset::new(format!("{}[arm={}]", self.name, arm.index()), samples)
    }

    /// Copy in which every sample reports the given propensity, whatever was
    /// logged before. Oracle data is untouched.
    pub fn with_constant_propensity(&self, propensity: T) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                propensity: Some(propensity),
                ..s.clone()
            })
            .collect();
        Dataset::new(self.name.clone(), samples)
    }

    /// Copy with observable propensities removed.
    pub fn without_propensity(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                propensity: None,
                ..s.clone()
            })
            .collect();
        Dataset {
            samples,
            ..self.clone()
        }
    }

    /// Difference of arm means, `mean(Y | T=1) - mean(Y | T=0)`.
    pub fn difference_in_means(&self) -> Result<T> {
        let idx: Vec<usize> = (0..self.len()).collect();
        difference_in_means(&self.samples, &idx).ok_or_else(|| {
            CdmError::Precondition(format!("dataset `{}` lacks one of the two arms", self.name))
        })
    }
}

/// Difference in arm means over the samples at `indices`, summing in the
/// order given. `None` when either arm is empty.
pub fn difference_in_means<T: Scalar>(samples: &[Sample<T>], indices: &[usize]) -> Option<T> {
    let (mut s1, mut n1, mut s0, mut n0) = (T::zero(), 0usize, T::zero(), 0usize);
    for &i in indices {
        let s = &samples[i];
        if s.treatment.is_treated() {
            s1 += s.outcome;
            n1 += 1;
        } else {
            s0 += s.outcome;
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return None;
    }
    Some(s1 / T::from_usize_lossy(n1) - s0 / T::from_usize_lossy(n0))
}
