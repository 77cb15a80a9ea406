//! Evaluation metrics for effect models and policies.
//!
//! Effect estimation is scored by the transformed-outcome MSE, decisions by
//! oracle regret (synthetic data), IPS policy value (logged data) and uplift
//! curves (randomized data).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TreatmentLevel};
use crate::error::{CdmError, Result};
use crate::model::{EffectModel, Policy};
use crate::scalar::{mean_and_se, Scalar};

/// `Y* = y (t - e) / (e (1 - e))`. Under randomization `E[Y* | X] = f(X)`.
pub fn transformed_outcome<T: Scalar>(y: T, t: TreatmentLevel, e: T) -> Result<T> {
    if !(e > T::zero() && e < T::one()) {
        return Err(CdmError::Precondition(format!(
            "propensity {e} outside (0, 1)"
        )));
    }
    let t = if t.is_treated() { T::one() } else { T::zero() };
    Ok(y * (t - e) / (e * (T::one() - e)))
}

/// One scalar metric with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metric: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub n: usize,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl EvaluationReport {
    fn from_terms(metric: &str, terms: &[f64]) -> Self {
        let (value, se) = mean_and_se(terms);
        EvaluationReport {
            metric: metric.to_string(),
            value,
            std_error: Some(se),
            n: terms.len(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}

fn transformed_outcomes<T: Scalar>(test: &Dataset<T>, what: &str) -> Result<Vec<T>> {
    test.samples()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let e = s.propensity.ok_or_else(|| {
                CdmError::MissingPropensity(format!("{what}: sample {i} has no propensity"))
            })?;
            transformed_outcome(s.outcome, s.treatment, e)
        })
        .collect()
}

/// Mean of `(Y* - f_hat(x))^2` over `test`.
///
/// Differs from the true effect MSE by a model-independent constant, so only
/// differences between models are meaningful (`comparative_only = true`).
pub fn effect_mse<T: Scalar, M: EffectModel<T> + ?Sized>(
    model: &M,
    test: &Dataset<T>,
) -> Result<EvaluationReport> {
    let ystar = transformed_outcomes(test, "effect_mse")?;
    let terms: Vec<f64> = test
        .samples()
        .iter()
        .zip(&ystar)
        .map(|(s, &y)| {
            let d = y - model.predict_effect(&s.features);
            (d * d).as_f64()
        })
        .collect();
    Ok(EvaluationReport::from_terms("effect_mse", &terms).with_meta("comparative_only", true))
}

/// Mean of `(true_cate - f_hat(x))^2` on synthetic data.
pub fn true_effect_mse<T: Scalar, M: EffectModel<T> + ?Sized>(
    model: &M,
    test: &Dataset<T>,
) -> Result<EvaluationReport> {
    let oracles = test.oracles("true_effect_mse")?;
    let terms: Vec<f64> = test
        .samples()
        .iter()
        .zip(oracles)
        .map(|(s, o)| {
            let d = o.true_cate - model.predict_effect(&s.features);
            (d * d).as_f64()
        })
        .collect();
    Ok(EvaluationReport::from_terms("true_effect_mse", &terms))
}

/// Mean of `max(Y(0), Y(1)) - Y(policy(x))`; zero exactly for the optimal policy.
pub fn oracle_regret<T: Scalar, P: Policy<T> + ?Sized>(
    policy: &P,
    test: &Dataset<T>,
) -> Result<EvaluationReport> {
    let oracles = test.oracles("oracle_regret")?;
    let terms: Vec<f64> = test
        .samples()
        .iter()
        .zip(oracles)
        .map(|(s, o)| (o.best_outcome() - o.outcome(policy.assign(&s.features))).as_f64())
        .collect();
    Ok(EvaluationReport::from_terms("oracle_regret", &terms))
}

/// Per-sample IPS terms `1{t = policy(x)} y / p(t | x)`.
pub fn ips_terms<T: Scalar, P: Policy<T> + ?Sized>(
    policy: &P,
    logged: &Dataset<T>,
) -> Result<Vec<T>> {
    let probs = logged.arm_probabilities("ips_policy_value")?;
    Ok(logged
        .samples()
        .iter()
        .zip(probs)
        .map(|(s, p)| {
            if policy.assign(&s.features) == s.treatment {
                s.outcome / p
            } else {
                T::zero()
            }
        })
        .collect())
}

/// Inverse-propensity-scored value of `policy` on logged data.
pub fn ips_policy_value<T: Scalar, P: Policy<T> + ?Sized>(
    policy: &P,
    logged: &Dataset<T>,
) -> Result<EvaluationReport> {
    let terms: Vec<f64> = ips_terms(policy, logged)?
        .into_iter()
        .map(|v| v.as_f64())
        .collect();
    Ok(EvaluationReport::from_terms("ips_policy_value", &terms))
}

/// Fraction of units where the policy disagrees with `1(true_cate > 0)`.
pub fn decision_error_rate<T: Scalar, P: Policy<T> + ?Sized>(
    policy: &P,
    test: &Dataset<T>,
) -> Result<EvaluationReport> {
    let oracles = test.oracles("decision_error_rate")?;
    let terms: Vec<f64> = test
        .samples()
        .iter()
        .zip(oracles)
        .map(|(s, o)| {
            let best = TreatmentLevel::from_bool(o.true_cate > T::zero());
            if policy.assign(&s.features) == best {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    Ok(EvaluationReport::from_terms("decision_error_rate", &terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpliftPoint<T> {
    pub fraction: T,
    pub incremental_outcome: T,
}

/// Cumulative incremental outcome against the targeted fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpliftCurve<T> {
    pub points: Vec<UpliftPoint<T>>,
    /// Grid fractions where the targeted set lacked one arm (reported as 0).
    pub empty_arm_fractions: Vec<T>,
    /// Number of ranked units.
    pub n: usize,
}

impl<T: Scalar> UpliftCurve<T> {
    /// The same curve divided by the population size.
    pub fn per_capita(&self) -> Vec<UpliftPoint<T>> {
        let n = T::from_usize_lossy(self.n);
        self.points
            .iter()
            .map(|p| UpliftPoint {
                fraction: p.fraction,
                incremental_outcome: p.incremental_outcome / n,
            })
            .collect()
    }

    /// Headerless `fraction,incremental_outcome` lines, first line `0,0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.fraction, p.incremental_outcome);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| CdmError::io(path, e))
    }
}

/// Uplift curve of a ranking on randomized data.
///
/// Units are sorted by descending score (ties keep dataset order). For each
/// grid fraction `q = g / n_grid` the top `ceil(q N)` units form `S` and the
/// curve value is `(mean(Y | S, T=1) - mean(Y | S, T=0)) * |S|`, with sums taken
/// in dataset order.
pub fn uplift_curve<T: Scalar>(
    scores: &[T],
    test: &Dataset<T>,
    n_grid: usize,
) -> Result<UpliftCurve<T>> {
    if n_grid == 0 {
        return Err(CdmError::Config("n_grid must be >= 1".into()));
    }
    if scores.len() != test.len() {
        return Err(CdmError::Precondition(format!(
            "{} scores for {} units",
            scores.len(),
            test.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(CdmError::Precondition(
            "uplift scores must be finite".into(),
        ));
    }
    if !test.has_propensities() {
        return Err(CdmError::MissingPropensity(
            "uplift curve needs randomized data with a declared propensity".into(),
        ));
    }
    if test.constant_propensity().is_none() {
        return Err(CdmError::Precondition(
            "uplift curve requires randomized data with constant propensity".into(),
        ));
    }
    let n = test.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("finite")
            .then(a.cmp(&b))
    });
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let samples = test.samples();
    let mut points = Vec::with_capacity(n_grid + 1);
    let mut empty = Vec::new();
    for g in 0..=n_grid {
        let fraction = T::from_usize_lossy(g) / T::from_usize_lossy(n_grid);
        let k = (g * n).div_ceil(n_grid);
        let (mut s1, mut n1, mut s0, mut n0) = (T::zero(), 0usize, T::zero(), 0usize);
        for (i, s) in samples.iter().enumerate() {
            if rank[i] >= k {
                continue;
            }
            if s.treatment.is_treated() {
                s1 += s.outcome;
                n1 += 1;
            } else {
                s0 += s.outcome;
                n0 += 1;
            }
        }
        let incremental_outcome = if n1 == 0 || n0 == 0 {
            if k > 0 {
                empty.push(fraction);
            }
            T::zero()
        } else {
            (s1 / T::from_usize_lossy(n1) - s0 / T::from_usize_lossy(n0)) * T::from_usize_lossy(k)
        };
        points.push(UpliftPoint {
            fraction,
            incremental_outcome,
        });
    }
    Ok(UpliftCurve {
        points,
        empty_arm_fractions: empty,
        n,
    })
}

/// Trapezoidal area under an uplift curve.
pub fn auuc<T: Scalar>(curve: &UpliftCurve<T>) -> T {
    curve.points.windows(2).fold(T::zero(), |acc, w| {
        acc + (w[1].fraction - w[0].fraction)
            * (w[0].incremental_outcome + w[1].incremental_outcome)
            / T::lit(2.0)
    })
}

/// Report wrapper for an uplift curve: AUUC as the value, absolute and
/// per-capita AUUC plus empty-arm flags in the metadata.
pub fn uplift_report<T: Scalar>(curve: &UpliftCurve<T>) -> EvaluationReport {
    let area = auuc(curve).as_f64();
    let mut r = EvaluationReport {
        metric: "auuc".into(),
        value: area,
        std_error: None,
        n: curve.n,
        metadata: BTreeMap::new(),
    }
    .with_meta("auuc_per_capita", area / curve.n as f64)
    .with_meta("grid_points", curve.points.len());
    if !curve.empty_arm_fractions.is_empty() {
        let list: Vec<String> = curve
            .empty_arm_fractions
            .iter()
            .map(|f| f.to_string())
            .collect();
        r = r.with_meta("empty_arm_fractions", list.join(";"));
    }
    r
}
