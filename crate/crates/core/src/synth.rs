//! Synthetic data with known potential outcomes.
//!
//! Every unit draws, in this order: features `X ~ U[-1, 1]^d`, a latent
//! confounder `u ~ N(0, 1)`, outcome noise `eps ~ N(0, sd)`, a coupling
//! uniform `v` for binary outcomes and an assignment uniform `a`. The draw
//! sequence is the same whatever the assignment mechanism, so an RCT and a
//! confounded dataset with the same seed share features and potential
//! outcomes unit for unit.
//!
//! Potential outcomes are coupled: continuous arms share `eps`, binary arms
//! share `v` (`Y(i) = 1{v < p_i}`), which makes `Y(1) - Y(0)` carry the sign
//! of the effect on every unit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Oracle, Sample, TreatmentLevel};
use crate::error::{CdmError, Result};
use crate::model::{EffectModel, Policy};
use crate::scalar::{ordered_sum, Scalar};

/// Number of features in Criteo-like data.
pub const CRITEO_N_FEATURES: usize = 11;

const PROPENSITY_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    #[default]
    Continuous,
    /// Success probability `logistic(mu)`.
    Bernoulli,
}

/// How the effect index maps features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EffectForm {
    /// `f(x) = b + c . x`
    #[default]
    Linear,
    /// `f(x) = b + sum_j c_j * sign(x_j)`, with `sign(0) = -1`.
    Step,
}

/// Which way hidden selection pushes naive effect estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConfoundingDirection {
    /// Selection on baseline: treated units have lower `Y(0)` where the
    /// effect is positive, shrinking estimates towards (and past) zero.
    #[default]
    Opposing,
    /// Selection on gains: treated units have higher `Y(0)` where the effect
    /// is positive, inflating effect magnitudes.
    Reinforcing,
}

fn default_propensity() -> f64 {
    0.5
}

/// Linear-index data generating process.
///
/// `mu0(x) = baseline_intercept + baseline_coefs . x` and `f(x)` per
/// [`EffectForm`]. The latent confounder enters the baseline as
/// `+/- confounder_loading * f(x) * u` (sign set by the direction) and the
/// assignment logit as `logit(propensity) + gamma * (u + z(x))`, where
/// `z = mu0` for opposing and `z = f` for reinforcing selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpConfig {
    pub n_samples: usize,
    pub n_features: usize,
    #[serde(default)]
    pub baseline_intercept: f64,
    pub baseline_coefs: Vec<f64>,
    #[serde(default)]
    pub effect_intercept: f64,
    pub effect_coefs: Vec<f64>,
    #[serde(default)]
    pub effect_form: EffectForm,
    #[serde(default)]
    pub outcome_noise_sd: f64,
    #[serde(default)]
    pub outcome_kind: OutcomeKind,
    #[serde(default = "default_propensity")]
    pub propensity: f64,
    #[serde(default)]
    pub confounding_strength: f64,
    #[serde(default)]
    pub confounding_direction: ConfoundingDirection,
    #[serde(default)]
    pub confounder_loading: f64,
    #[serde(default)]
    pub hide_propensity: bool,
    pub seed: u64,
}

impl DgpConfig {
    /// Continuous-outcome RCT with the given coefficients and no noise.
    pub fn rct(
        n_samples: usize,
        baseline_coefs: Vec<f64>,
        effect_coefs: Vec<f64>,
        seed: u64,
    ) -> Self {
        DgpConfig {
            n_samples,
            n_features: baseline_coefs.len(),
            baseline_intercept: 0.0,
            baseline_coefs,
            effect_intercept: 0.0,
            effect_coefs,
            effect_form: EffectForm::Linear,
            outcome_noise_sd: 0.0,
            outcome_kind: OutcomeKind::Continuous,
            propensity: 0.5,
            confounding_strength: 0.0,
            confounding_direction: ConfoundingDirection::Opposing,
            confounder_loading: 0.0,
            hide_propensity: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(CdmError::Config(m));
        if self.n_samples == 0 {
            return err("n_samples must be positive".into());
        }
        if self.baseline_coefs.len() != self.n_features
            || self.effect_coefs.len() != self.n_features
        {
            return err(format!(
                "coefficient vectors must have length n_features = {}",
                self.n_features
            ));
        }
        let finite = self
            .baseline_coefs
            .iter()
            .chain(&self.effect_coefs)
            .chain([
                &self.baseline_intercept,
                &self.effect_intercept,
                &self.confounder_loading,
                &self.confounding_strength,
            ])
            .all(|v| v.is_finite());
        if !finite {
            return err("coefficients must be finite".into());
        }
        if !(self.outcome_noise_sd >= 0.0 && self.outcome_noise_sd.is_finite()) {
            return err("outcome_noise_sd must be finite and >= 0".into());
        }
        if !(self.propensity > 0.0 && self.propensity < 1.0) {
            return err(format!("propensity {} outside (0, 1)", self.propensity));
        }
        Ok(())
    }

    /// Baseline index `mu0(x)` (logit scale for binary outcomes).
    pub fn baseline_index(&self, x: &[f64]) -> f64 {
        self.baseline_intercept + dot(&self.baseline_coefs, x)
    }

    /// Effect index `f(x)`; the CATE itself for continuous outcomes and the
    /// logit shift for binary ones. Its sign is the sign of the CATE either way.
    pub fn effect_index(&self, x: &[f64]) -> f64 {
        match self.effect_form {
            EffectForm::Linear => self.effect_intercept + dot(&self.effect_coefs, x),
            EffectForm::Step => {
                self.effect_intercept
                    + self
                        .effect_coefs
                        .iter()
                        .zip(x)
                        .map(|(c, &v)| if v > 0.0 { *c } else { -*c })
                        .sum::<f64>()
            }
        }
    }

    /// Effect model returning [`DgpConfig::effect_index`]; thresholding it at
    /// zero gives the optimal policy.
    pub fn true_effect_model(&self) -> TrueEffect {
        TrueEffect(self.clone())
    }
}

/// The generating effect index of a [`DgpConfig`] as an [`EffectModel`].
#[derive(Debug, Clone)]
pub struct TrueEffect(DgpConfig);

impl<T: Scalar> EffectModel<T> for TrueEffect {
    fn predict_effect(&self, x: &[T]) -> T {
        let xf: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
        T::lit(self.0.effect_index(&xf))
    }

    fn n_features(&self) -> Option<usize> {
        Some(self.0.n_features)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

struct UnitDraw {
    x: Vec<f64>,
    u: f64,
    eps: f64,
    v: f64,
    a: f64,
}

fn draw_unit(rng: &mut ChaCha8Rng, n_features: usize, noise_sd: f64) -> UnitDraw {
    let x = (0..n_features)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let u: f64 = rng.sample(StandardNormal);
    let z: f64 = rng.sample(StandardNormal);
    let v: f64 = rng.random();
    let a: f64 = rng.random();
    UnitDraw {
        x,
        u,
        eps: noise_sd * z,
        v,
        a,
    }
}

fn generate<T: Scalar>(config: &DgpConfig, confounded: bool, name: String) -> Result<Dataset<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dir = match config.confounding_direction {
        ConfoundingDirection::Opposing => -1.0,
        ConfoundingDirection::Reinforcing => 1.0,
    };
    let mut samples = Vec::with_capacity(config.n_samples);
    for _ in 0..config.n_samples {
        let d = draw_unit(&mut rng, config.n_features, config.outcome_noise_sd);
        let mu0 = config.baseline_index(&d.x);
        let f = config.effect_index(&d.x);
        let m0 = mu0 + dir * config.confounder_loading * f * d.u;
        let (y0, y1, cate) = match config.outcome_kind {
            OutcomeKind::Continuous => {
                let y0 = m0 + d.eps;
                let y1 = y0 + f;
                (y0, y1, y1 - y0)
            }
            OutcomeKind::Bernoulli => {
                let (p0, p1) = (logistic(m0), logistic(m0 + f));
                let y = |p: f64| if d.v < p { 1.0 } else { 0.0 };
                (y(p0), y(p1), p1 - p0)
            }
        };
        let e = if confounded {
            let selection = match config.confounding_direction {
                ConfoundingDirection::Opposing => d.u + mu0,
                ConfoundingDirection::Reinforcing => d.u + f,
            };
            logistic(logit(config.propensity) + config.confounding_strength * selection)
                .clamp(PROPENSITY_FLOOR, 1.0 - PROPENSITY_FLOOR)
        } else {
            config.propensity
        };
        let t = TreatmentLevel::from_bool(d.a < e);
        let mut s = Sample::synthetic(
            d.x.into_iter().map(T::lit).collect(),
            t,
            [T::lit(y0), T::lit(y1)],
            T::lit(cate),
        );
        let e_t = T::lit(e);
        if let Some(o) = s.oracle.as_mut() {
            o.true_propensity = Some(e_t);
        }
        if !config.hide_propensity {
            s.propensity = Some(e_t);
        }
        samples.push(s);
    }
    Dataset::new(name, samples)
}

/// Randomized experiment: `T ~ Bernoulli(propensity)` independent of everything.
pub fn gen_rct<T: Scalar>(config: &DgpConfig) -> Result<Dataset<T>> {
    if config.confounding_strength != 0.0 {
        return Err(CdmError::Config(
            "gen_rct requires confounding_strength == 0; use gen_confounded".into(),
        ));
    }
    generate(config, false, format!("rct-seed{}", config.seed))
}

/// Observational data with hidden selection of strength `confounding_strength`.
pub fn gen_confounded<T: Scalar>(config: &DgpConfig) -> Result<Dataset<T>> {
    if !(config.confounding_strength > 0.0) {
        return Err(CdmError::Config(
            "gen_confounded requires confounding_strength > 0; use gen_rct".into(),
        ));
    }
    generate(config, true, format!("confounded-seed{}", config.seed))
}

/// Criteo-style randomized ad experiment with rare binary conversions.
///
/// Conversion probability without treatment is
/// `base_rate * (1 + outcome_snr * h(x))` and the effect is
/// `base_rate * (effect_mean + effect_snr * (rho * h(x) + sqrt(1 - rho^2) * g(x)))`,
/// where `h` averages features 0..4, `g` averages features 4..8 and features
/// 8..11 are noise. Probabilities are clamped to `[0, 1]`.
///
/// Omitted fields other than `seed` take the [`Default`] values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriteoLikeConfig {
    #[serde(default = "criteo_defaults::n_samples")]
    pub n_samples: usize,
    #[serde(default = "criteo_defaults::treat_rate")]
    pub treat_rate: f64,
    #[serde(default = "criteo_defaults::outcome_snr")]
    pub outcome_snr: f64,
    #[serde(default = "criteo_defaults::effect_snr")]
    pub effect_snr: f64,
    #[serde(default = "criteo_defaults::effect_outcome_corr")]
    pub effect_outcome_corr: f64,
    pub seed: u64,
    #[serde(default = "criteo_defaults::base_rate")]
    pub base_rate: f64,
    #[serde(default)]
    pub effect_mean: f64,
}

mod criteo_defaults {
    pub fn n_samples() -> usize {
        100_000
    }
    pub fn treat_rate() -> f64 {
        0.85
    }
    pub fn outcome_snr() -> f64 {
        0.9
    }
    pub fn effect_snr() -> f64 {
        0.4
    }
    pub fn effect_outcome_corr() -> f64 {
        0.8
    }
    pub fn base_rate() -> f64 {
        0.25
    }
}

impl Default for CriteoLikeConfig {
    fn default() -> Self {
        CriteoLikeConfig {
            n_samples: criteo_defaults::n_samples(),
            treat_rate: criteo_defaults::treat_rate(),
            outcome_snr: criteo_defaults::outcome_snr(),
            effect_snr: criteo_defaults::effect_snr(),
            effect_outcome_corr: criteo_defaults::effect_outcome_corr(),
            seed: 0,
            base_rate: criteo_defaults::base_rate(),
            effect_mean: 0.0,
        }
    }
}

impl CriteoLikeConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(CdmError::Config(m));
        if self.n_samples == 0 {
            return err("n_samples must be positive".into());
        }
        if !(self.treat_rate > 0.0 && self.treat_rate < 1.0) {
            return err(format!("treat_rate {} outside (0, 1)", self.treat_rate));
        }
        if !(self.effect_outcome_corr.abs() <= 1.0) {
            return err(format!(
                "effect_outcome_corr {} outside [-1, 1]",
                self.effect_outcome_corr
            ));
        }
        if !(self.outcome_snr >= 0.0 && self.effect_snr >= 0.0)
            || !self.outcome_snr.is_finite()
            || !self.effect_snr.is_finite()
        {
            return err("outcome_snr and effect_snr must be finite and >= 0".into());
        }
        if !(self.base_rate > 0.0 && self.base_rate < 1.0) || !self.effect_mean.is_finite() {
            return err("base_rate must lie in (0, 1) and effect_mean be finite".into());
        }
        Ok(())
    }

    fn signals(x: &[f64]) -> (f64, f64) {
        let h = x[0..4].iter().sum::<f64>() / 4.0;
        let g = x[4..8].iter().sum::<f64>() / 4.0;
        (h, g)
    }

    /// `P(Y(0) = 1 | x)` before clamping.
    pub fn baseline_probability(&self, x: &[f64]) -> f64 {
        let (h, _) = Self::signals(x);
        (self.base_rate * (1.0 + self.outcome_snr * h)).clamp(0.0, 1.0)
    }

    /// Treated conversion probability minus control conversion probability.
    pub fn cate(&self, x: &[f64]) -> f64 {
        let (h, g) = Self::signals(x);
        let rho = self.effect_outcome_corr;
        let mix = rho * h + (1.0 - rho * rho).max(0.0).sqrt() * g;
        let p0 = self.baseline_probability(x);
        let p1 = (p0 + self.base_rate * (self.effect_mean + self.effect_snr * mix)).clamp(0.0, 1.0);
        p1 - p0
    }
}

/// Randomized Criteo-like data; see [`CriteoLikeConfig`].
pub fn gen_criteo_like<T: Scalar>(config: &CriteoLikeConfig) -> Result<Dataset<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::with_capacity(config.n_samples);
    for _ in 0..config.n_samples {
        let d = draw_unit(&mut rng, CRITEO_N_FEATURES, 0.0);
        let p0 = config.baseline_probability(&d.x);
        let cate = config.cate(&d.x);
        let p1 = p0 + cate;
        let y = |p: f64| if d.v < p { 1.0 } else { 0.0 };
        let t = TreatmentLevel::from_bool(d.a < config.treat_rate);
        let e = T::lit(config.treat_rate);
        let mut s = Sample::synthetic(
            d.x.into_iter().map(T::lit).collect(),
            t,
            [T::lit(y(p0)), T::lit(y(p1))],
            T::lit(cate),
        )
        .with_propensity(e);
        if let Some(o) = s.oracle.as_mut() {
            o.true_propensity = Some(e);
        }
        samples.push(s);
    }
    Dataset::new(format!("criteo-like-seed{}", config.seed), samples)
}

/// `mean_j Y_j(policy(x_j))`, computed from potential outcomes.
pub fn oracle_policy_value<T: Scalar, P: Policy<T> + ?Sized>(
    dataset: &Dataset<T>,
    policy: &P,
) -> Result<T> {
    let oracles = dataset.oracles("oracle_policy_value")?;
    let total = ordered_sum(
        dataset
            .samples()
            .iter()
            .zip(oracles)
            .map(|(s, o)| o.outcome(policy.assign(&s.features))),
    );
    Ok(total / T::from_usize_lossy(dataset.len()))
}

/// Ground-truth oracle of one sample, for callers that already checked
/// [`Dataset::is_synthetic`].
pub fn oracle_of<T: Scalar>(s: &Sample<T>) -> &Oracle<T> {
    s.oracle.as_ref().expect("synthetic sample")
}
