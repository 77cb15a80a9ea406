//! Simulations: biased-vs-unbiased decision scenarios, the confounded
//! training experiment and the proxy-target (outcome vs effect) experiment.
//!
//! Replication `r` is seeded with `seed + r`; replications run in parallel
//! and are merged in index order, so reports are bit-reproducible.

use std::collections::BTreeMap;

use libm::erfc;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, TreatmentLevel};
use crate::error::{CdmError, Result};
use crate::eval::{auuc, oracle_regret, uplift_curve, EvaluationReport, UpliftCurve};
use crate::model::{OutcomeModel, Policy};
use crate::policy::threshold_policy;
use crate::reduction::{fit_policy_tree, to_weighted_classification};
use crate::scalar::mean_and_se;
use crate::synth::{gen_confounded, gen_criteo_like, gen_rct, CriteoLikeConfig, DgpConfig};
use crate::trees::{
    cross_validate, fit_causal_tree, fit_outcome_tree, predict_effect_batch, ParamGrid, TreeParams,
    TunedMethod,
};

/// Standard normal CDF, `0.5 * erfc(-z / sqrt(2))`.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Probability that a `N(mean, sd^2)` estimate lands on the wrong side of `tau`.
/// Treatment is chosen when the estimate exceeds `tau`.
pub fn analytic_wrong_prob(mean: f64, sd: f64, tau: f64, correct_is_treat: bool) -> Result<f64> {
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(CdmError::Config(format!("sd must be positive, got {sd}")));
    }
    let below = std_normal_cdf((tau - mean) / sd);
    Ok(if correct_is_treat { below } else { 1.0 - below })
}

fn default_true_effect() -> f64 {
    1.0
}
fn default_um_mean() -> f64 {
    1.0
}
fn default_um_sd() -> f64 {
    0.7
}
fn default_bm_sd() -> f64 {
    0.35
}
fn default_n_draws() -> usize {
    100_000
}

/// Sampling distributions of a biased (BM) and an unbiased (UM) effect
/// estimator around a decision threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "default_true_effect")]
    pub true_effect: f64,
    #[serde(default)]
    pub tau: f64,
    pub bm_mean: f64,
    #[serde(default = "default_bm_sd")]
    pub bm_sd: f64,
    #[serde(default = "default_um_mean")]
    pub um_mean: f64,
    #[serde(default = "default_um_sd")]
    pub um_sd: f64,
    #[serde(default = "default_n_draws")]
    pub n_draws: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Panel defaults: large opposite bias, small opposite bias, reinforcing bias.
    pub fn default_panels(seed: u64) -> Vec<ScenarioConfig> {
        [("a", -0.2), ("b", 0.5), ("c", 1.5)]
            .into_iter()
            .enumerate()
            .map(|(i, (label, bm_mean))| ScenarioConfig {
                label: Some(label.into()),
                true_effect: default_true_effect(),
                tau: 0.0,
                bm_mean,
                bm_sd: default_bm_sd(),
                um_mean: default_um_mean(),
                um_sd: default_um_sd(),
                n_draws: default_n_draws(),
                seed: seed + i as u64,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bm_sd > 0.0 && self.um_sd > 0.0) {
            return Err(CdmError::Config("scenario sds must be positive".into()));
        }
        if self.n_draws == 0 {
            return Err(CdmError::Config("n_draws must be >= 1".into()));
        }
        let finite = [
            self.true_effect,
            self.tau,
            self.bm_mean,
            self.um_mean,
            self.bm_sd,
            self.um_sd,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(CdmError::Config(
                "scenario parameters must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Treating is correct when the true effect exceeds the threshold.
    pub fn correct_action(&self) -> TreatmentLevel {
        TreatmentLevel::from_bool(self.true_effect > self.tau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub correct_action: TreatmentLevel,
    pub n_draws: usize,
    pub bm_wrong_rate: f64,
    pub um_wrong_rate: f64,
    pub bm_wrong_analytic: f64,
    pub um_wrong_analytic: f64,
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    config.validate()?;
    let treat = config.correct_action().is_treated();
    let wrong = |estimate: f64| (estimate > config.tau) != treat;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut bm_wrong, mut um_wrong) = (0usize, 0usize);
    for _ in 0..config.n_draws {
        let zb: f64 = rng.sample(StandardNormal);
        let zu: f64 = rng.sample(StandardNormal);
        bm_wrong += usize::from(wrong(config.bm_mean + config.bm_sd * zb));
        um_wrong += usize::from(wrong(config.um_mean + config.um_sd * zu));
    }
    let n = config.n_draws as f64;
    Ok(ScenarioResult {
        label: config.label.clone(),
        correct_action: config.correct_action(),
        n_draws: config.n_draws,
        bm_wrong_rate: bm_wrong as f64 / n,
        um_wrong_rate: um_wrong as f64 / n,
        bm_wrong_analytic: analytic_wrong_prob(config.bm_mean, config.bm_sd, config.tau, treat)?,
        um_wrong_analytic: analytic_wrong_prob(config.um_mean, config.um_sd, config.tau, treat)?,
    })
}

/// Seed of replication `rep`.
pub fn replication_seed(seed: u64, rep: usize) -> u64 {
    seed.wrapping_add(rep as u64)
}

/// Independent sub-seeds for the datasets of one replication.
fn sub_seeds<const N: usize>(rep_seed: u64) -> [u64; N] {
    let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
    std::array::from_fn(|_| rng.random())
}

fn default_proxy_test_size() -> usize {
    200_000
}

fn default_n_test() -> usize {
    20_000
}

/// Confounded-versus-experimental training comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfoundingConfig {
    /// Potential-outcome model shared by every dataset. Its
    /// `confounding_strength` and direction drive selection in the
    /// observational set; its `propensity` is the nominal constant the
    /// confounded learner is told.
    pub dgp: DgpConfig,
    pub n_confounded: usize,
    pub n_experimental: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    pub learner: TreeParams,
    /// Treat when the estimated effect exceeds this.
    #[serde(default)]
    pub threshold: f64,
    pub n_reps: usize,
    pub seed: u64,
}

impl ConfoundingConfig {
    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        self.learner.validate()?;
        let need = 2 * self.learner.min_leaf;
        if self.n_confounded < need || self.n_experimental < need {
            return Err(CdmError::Config(format!(
                "training sizes must be at least 2 * min_leaf = {need}"
            )));
        }
        if self.n_reps == 0 || self.n_test == 0 {
            return Err(CdmError::Config("n_reps and n_test must be >= 1".into()));
        }
        if !self.threshold.is_finite() {
            return Err(CdmError::Config("threshold must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfoundingRep {
    pub rep: usize,
    pub seed: u64,
    pub regret_confounded: f64,
    pub regret_experimental: f64,
    /// The confounded-trained policy has strictly lower regret.
    pub confounded_wins: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfoundingReport {
    pub reps: Vec<ConfoundingRep>,
    pub win_rate_confounded: f64,
    /// Mean and standard error of `regret_confounded - regret_experimental`.
    pub mean_regret_difference: f64,
    pub regret_difference_se: f64,
}

impl ConfoundingReport {
    pub fn to_reports(&self) -> Vec<EvaluationReport> {
        let mut out = Vec::new();
        for (metric, pick) in [
            (
                "oracle_regret_confounded",
                (|r: &ConfoundingRep| r.regret_confounded) as fn(&ConfoundingRep) -> f64,
            ),
            ("oracle_regret_experimental", |r: &ConfoundingRep| {
                r.regret_experimental
            }),
        ] {
            let values: Vec<f64> = self.reps.iter().map(pick).collect();
            let (mean, se) = mean_and_se(&values);
            out.push(EvaluationReport {
                metric: metric.into(),
                value: mean,
                std_error: Some(se),
                n: values.len(),
                metadata: BTreeMap::from([("aggregate".into(), "mean over replications".into())]),
            });
        }
        out.push(EvaluationReport {
            metric: "win_rate_confounded".into(),
            value: self.win_rate_confounded,
            std_error: None,
            n: self.reps.len(),
            metadata: BTreeMap::new(),
        });
        out
    }
}

fn confounding_rep(config: &ConfoundingConfig, rep: usize) -> Result<ConfoundingRep> {
    let seed = replication_seed(config.seed, rep);
    let [s_obs, s_rct, s_test] = sub_seeds::<3>(seed);
    let rct_dgp = |n: usize, seed: u64| DgpConfig {
        n_samples: n,
        confounding_strength: 0.0,
        hide_propensity: false,
        seed,
        ..config.dgp.clone()
    };
    let observational = DgpConfig {
        n_samples: config.n_confounded,
        hide_propensity: true,
        seed: s_obs,
        ..config.dgp.clone()
    };
    let confounded: Dataset<f64> = if observational.confounding_strength == 0.0 {
        gen_rct(&rct_dgp(config.n_confounded, s_obs))?
    } else {
        gen_confounded(&observational)?
    }
    .with_constant_propensity(config.dgp.propensity)?;
    let experimental: Dataset<f64> = gen_rct(&rct_dgp(config.n_experimental, s_rct))?;
    let test: Dataset<f64> = gen_rct(&rct_dgp(config.n_test, s_test))?;

    let regret = |train: &Dataset<f64>| -> Result<f64> {
        let model = fit_causal_tree(train, &config.learner)?;
        let policy = threshold_policy(model, config.threshold)?;
        Ok(oracle_regret(&policy, &test)?.value)
    };
    let regret_confounded = regret(&confounded)?;
    let regret_experimental = regret(&experimental)?;
    Ok(ConfoundingRep {
        rep,
        seed,
        regret_confounded,
        regret_experimental,
        confounded_wins: regret_confounded < regret_experimental,
    })
}

/// Trains the same causal-tree learner on a large confounded sample (told a
/// constant propensity) and on a small randomized one, and compares the
/// oracle regret of their threshold policies on a fresh randomized test set.
pub fn run_confounding_experiment(config: &ConfoundingConfig) -> Result<ConfoundingReport> {
    config.validate()?;
    let reps = (0..config.n_reps)
        .into_par_iter()
        .map(|rep| confounding_rep(config, rep))
        .collect::<Result<Vec<_>>>()?;
    let wins = reps.iter().filter(|r| r.confounded_wins).count();
    let diffs: Vec<f64> = reps
        .iter()
        .map(|r| r.regret_confounded - r.regret_experimental)
        .collect();
    let (mean, se) = mean_and_se(&diffs);
    Ok(ConfoundingReport {
        win_rate_confounded: wins as f64 / reps.len() as f64,
        mean_regret_difference: mean,
        regret_difference_se: se,
        reps,
    })
}

/// Targeting approaches compared by the proxy experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProxyMethod {
    /// Outcome tree fit on control-arm rows, ranking by predicted outcome.
    OutcomeTree,
    /// Causal tree, ranking by estimated effect.
    CausalTree,
    /// Weighted-classification policy tree, ranking by leaf treat share.
    PolicyTree,
}

impl ProxyMethod {
    pub const ALL: [ProxyMethod; 3] = [
        ProxyMethod::OutcomeTree,
        ProxyMethod::CausalTree,
        ProxyMethod::PolicyTree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProxyMethod::OutcomeTree => "outcome-tree",
            ProxyMethod::CausalTree => "causal-tree",
            ProxyMethod::PolicyTree => "policy-tree",
        }
    }
}

fn default_methods() -> Vec<ProxyMethod> {
    ProxyMethod::ALL.to_vec()
}

fn default_n_grid() -> usize {
    100
}

fn default_folds() -> usize {
    3
}

/// Cross-validated choice of depth and leaf size for the outcome and causal
/// trees, on each training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    #[serde(default)]
    pub grid: ParamGrid,
    #[serde(default = "default_folds")]
    pub folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxyConfig {
    /// Hyperparameters of all three trees (leaf sizes are per arm for the
    /// causal tree).
    pub learner: TreeParams,
    pub train_sizes: Vec<usize>,
    /// Held-out rows scored per replication.
    #[serde(default = "default_proxy_test_size")]
    pub test_size: usize,
    pub n_reps: usize,
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<ProxyMethod>,
    #[serde(default = "default_n_grid")]
    pub n_grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneConfig>,
}

impl ProxyConfig {
    pub fn validate(&self) -> Result<()> {
        self.learner.validate()?;
        if self.train_sizes.is_empty()
            || self
                .train_sizes
                .iter()
                .any(|&n| n < 2 * self.learner.min_leaf)
        {
            return Err(CdmError::Config(
                "train_sizes must be non-empty and each at least 2 * min_leaf".into(),
            ));
        }
        if self.n_reps == 0 || self.test_size == 0 || self.n_grid == 0 || self.methods.is_empty() {
            return Err(CdmError::Config(
                "n_reps, test_size, n_grid and methods must be non-empty".into(),
            ));
        }
        Ok(())
    }
}

/// Where proxy-experiment rows come from.
#[derive(Debug, Clone)]
pub enum ProxySource {
    /// Fresh Criteo-like draws per replication; `n_samples` and `seed` are
    /// overridden per replication.
    Generated(CriteoLikeConfig),
    /// A randomized dataset, reshuffled per replication.
    Loaded(Dataset<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyRun {
    pub rep: usize,
    pub seed: u64,
    pub train_size: usize,
    pub method: ProxyMethod,
    pub auuc: f64,
    pub auuc_per_capita: f64,
    /// Parameters used after optional tuning.
    pub params: TreeParams,
    pub curve: UpliftCurve<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxySummary {
    pub method: ProxyMethod,
    pub train_size: usize,
    pub median_auuc: f64,
    pub mean_auuc: f64,
    pub auuc_std_error: f64,
    pub n_reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyReport {
    pub runs: Vec<ProxyRun>,
    pub summaries: Vec<ProxySummary>,
}

impl ProxyReport {
    pub fn summary(&self, method: ProxyMethod, train_size: usize) -> Option<&ProxySummary> {
        self.summaries
            .iter()
            .find(|s| s.method == method && s.train_size == train_size)
    }

    pub fn to_reports(&self) -> Vec<EvaluationReport> {
        self.summaries
            .iter()
            .map(|s| EvaluationReport {
                metric: "auuc".into(),
                value: s.mean_auuc,
                std_error: Some(s.auuc_std_error),
                n: s.n_reps,
                metadata: BTreeMap::from([
                    ("method".into(), s.method.name().into()),
                    ("train_size".into(), s.train_size.to_string()),
                    ("median_auuc".into(), s.median_auuc.to_string()),
                ]),
            })
            .collect()
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn proxy_data(
    source: &ProxySource,
    train_size: usize,
    test_size: usize,
    seed: u64,
) -> Result<(Dataset<f64>, Dataset<f64>)> {
    match source {
        ProxySource::Generated(base) => {
            let [s_train, s_test] = sub_seeds::<2>(seed);
            let gen = |n: usize, seed: u64| {
                gen_criteo_like::<f64>(&CriteoLikeConfig {
                    n_samples: n,
                    seed,
                    ..base.clone()
                })
            };
            Ok((gen(train_size, s_train)?, gen(test_size, s_test)?))
        }
        ProxySource::Loaded(data) => {
            if train_size + test_size > data.len() {
                return Err(CdmError::Precondition(format!(
                    "dataset has {} rows, need {train_size} train + {test_size} test",
                    data.len()
                )));
            }
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut train = order[..train_size].to_vec();
            let mut test = order[train_size..train_size + test_size].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            Ok((
                data.select(&train, format!("{}[train]", data.name()))?,
                data.select(&test, format!("{}[test]", data.name()))?,
            ))
        }
    }
}

fn proxy_cell(
    source: &ProxySource,
    config: &ProxyConfig,
    rep: usize,
    train_size: usize,
) -> Result<Vec<ProxyRun>> {
    let seed = replication_seed(config.seed, rep);
    let (train, test) = proxy_data(source, train_size, config.test_size, seed)?;
    if test.constant_propensity().is_none() {
        return Err(CdmError::Precondition(
            "proxy experiment needs randomized data with a constant propensity".into(),
        ));
    }
    let tuned = |method: TunedMethod| -> Result<TreeParams> {
        match &config.tune {
            Some(t) => {
                Ok(cross_validate(&train, method, &config.learner, &t.grid, t.folds, seed)?.0)
            }
            None => Ok(config.learner.clone()),
        }
    };
    let mut runs = Vec::new();
    for &method in &config.methods {
        let (params, scores) = match method {
            ProxyMethod::OutcomeTree => {
                let params = tuned(TunedMethod::OutcomeTree {
                    arm: Some(TreatmentLevel::CONTROL),
                })?;
                let model = fit_outcome_tree(&train, Some(TreatmentLevel::CONTROL), &params)?;
                let scores = test
                    .samples()
                    .iter()
                    .map(|s| model.predict_outcome(&s.features))
                    .collect::<Vec<f64>>();
                (params, scores)
            }
            ProxyMethod::CausalTree => {
                let params = tuned(TunedMethod::CausalTree)?;
                let model = fit_causal_tree(&train, &params)?;
                (params, predict_effect_batch(&model, &test)?)
            }
            ProxyMethod::PolicyTree => {
                let params = config.learner.clone();
                let policy = fit_policy_tree(&to_weighted_classification(&train)?, &params)?;
                let scores = test
                    .samples()
                    .iter()
                    .map(|s| policy.score(&s.features).expect("policy trees score"))
                    .collect::<Vec<f64>>();
                (params, scores)
            }
        };
        let curve = uplift_curve(&scores, &test, config.n_grid)?;
        let area = auuc(&curve);
        runs.push(ProxyRun {
            rep,
            seed,
            train_size,
            method,
            auuc: area,
            auuc_per_capita: area / test.len() as f64,
            params,
            curve,
        });
    }
    Ok(runs)
}

/// Fits the selected targeting methods on randomized training data of each
/// size and scores them by uplift curves on held-out rows.
pub fn run_proxy_experiment(source: &ProxySource, config: &ProxyConfig) -> Result<ProxyReport> {
    config.validate()?;
    if let ProxySource::Generated(c) = source {
        c.validate()?;
    }
    let cells: Vec<(usize, usize)> = config
        .train_sizes
        .iter()
        .flat_map(|&n| (0..config.n_reps).map(move |rep| (n, rep)))
        .collect();
    let runs: Vec<ProxyRun> = cells
        .par_iter()
        .map(|&(n, rep)| proxy_cell(source, config, rep, n))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut summaries = Vec::new();
    for &train_size in &config.train_sizes {
        for &method in &config.methods {
            let values: Vec<f64> = runs
                .iter()
                .filter(|r| r.method == method && r.train_size == train_size)
                .map(|r| r.auuc)
                .collect();
            let (mean, se) = mean_and_se(&values);
            summaries.push(ProxySummary {
                method,
                train_size,
                median_auuc: median(&values),
                mean_auuc: mean,
                auuc_std_error: se,
                n_reps: values.len(),
            });
        }
    }
    Ok(ProxyReport { runs, summaries })
}
