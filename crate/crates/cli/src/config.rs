//! Command configs. Every struct rejects unknown keys.

use std::fs;
use std::path::{Path, PathBuf};

use cdm_core::ingest::CsvSchema;
use cdm_core::sim::{ConfoundingConfig, ProxyConfig, ScenarioConfig, TuneConfig};
use cdm_core::synth::{CriteoLikeConfig, DgpConfig};
use cdm_core::TreeParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

/// Version tag written into every report.
pub const REPORT_FORMAT_VERSION: &str = "cdm-report/1";

pub fn read_json<C: DeserializeOwned>(path: &Path, what: &str) -> Result<C, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::config(format!("{what} {}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Rct,
    Confounded,
    CriteoLike,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub generator: Generator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dgp: Option<DgpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteo_like: Option<CriteoLikeConfig>,
    /// CSV destination.
    pub output: PathBuf,
    /// Append y0, y1 and true_cate columns.
    #[serde(default)]
    pub include_oracle: bool,
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        match (self.generator, &self.dgp, &self.criteo_like) {
            (Generator::Rct | Generator::Confounded, Some(_), None) => Ok(()),
            (Generator::CriteoLike, None, Some(_)) => Ok(()),
            (Generator::CriteoLike, _, _) => Err(Failure::config(
                "generator `criteo_like` needs a `criteo_like` section and no `dgp`",
            )),
            _ => Err(Failure::config(
                "generators `rct` and `confounded` need a `dgp` section and no `criteo_like`",
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMethod {
    OutcomeTree,
    CausalTree,
    TwoModel,
    PolicyTree,
}

/// How logged data becomes a weighted classification problem for the policy
/// tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// Inverse-propensity weights from logged outcomes.
    #[default]
    Ips,
    /// Both potential outcomes; synthetic data only.
    FullInformation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub input: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<CsvSchema>,
    pub method: TrainMethod,
    #[serde(default)]
    pub params: TreeParams,
    /// Outcome tree only: restrict fitting to one arm (0 or 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<u8>,
    #[serde(default)]
    pub reduction: Reduction,
    pub model_output: PathBuf,
    /// Outcome and causal trees only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tune: Option<TuneConfig>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        self.params.validate()?;
        if self.arm.is_some() && self.method != TrainMethod::OutcomeTree {
            return Err(Failure::config("`arm` applies to method outcome-tree only"));
        }
        if matches!(self.arm, Some(a) if a > 1) {
            return Err(Failure::config("`arm` must be 0 or 1"));
        }
        if self.reduction != Reduction::Ips && self.method != TrainMethod::PolicyTree {
            return Err(Failure::config(
                "`reduction` applies to method policy-tree only",
            ));
        }
        if self.tune.is_some()
            && !matches!(
                self.method,
                TrainMethod::OutcomeTree | TrainMethod::CausalTree
            )
        {
            return Err(Failure::config(
                "`tune` applies to outcome-tree and causal-tree only",
            ));
        }
        if let Some(t) = &self.tune {
            if t.folds < 2 {
                return Err(Failure::config("tune.folds must be at least 2"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    EffectMse,
    TrueEffectMse,
    OracleRegret,
    IpsValue,
    UpliftCurve,
    DecisionErrorRate,
}

fn default_n_grid() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub model: PathBuf,
    pub test: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<CsvSchema>,
    pub metrics: Vec<Metric>,
    /// Decision threshold for effect and outcome models.
    #[serde(default)]
    pub threshold: f64,
    #[serde(default = "default_n_grid")]
    pub n_grid: usize,
    /// Where the uplift curve CSV goes; defaults to `uplift_curve.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_output: Option<PathBuf>,
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.metrics.is_empty() {
            return Err(Failure::config("`metrics` is empty"));
        }
        if !self.threshold.is_finite() {
            return Err(Failure::config("`threshold` must be finite"));
        }
        if self.n_grid == 0 {
            return Err(Failure::config("`n_grid` must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub scenarios: Vec<ScenarioConfig>,
    /// Also run the three default panels, seeded from this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_panels_seed: Option<u64>,
}

impl SimulateConfig {
    pub fn all_scenarios(&self) -> Result<Vec<ScenarioConfig>, Failure> {
        let mut out = self
            .default_panels_seed
            .map(ScenarioConfig::default_panels)
            .unwrap_or_default();
        out.extend(self.scenarios.iter().cloned());
        if out.is_empty() {
            return Err(Failure::config(
                "no scenarios: give `scenarios` or `default_panels_seed`",
            ));
        }
        for s in &out {
            s.validate()?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Confounding,
    Proxy,
}

/// Rows for the proxy experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProxyData {
    /// Generator settings; `n_samples` and `seed` are replaced per
    /// replication, so `seed` may be omitted here.
    CriteoLike(serde_json::Map<String, serde_json::Value>),
    Csv {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schema: Option<CsvSchema>,
    },
}

impl ProxyData {
    pub fn criteo_like(
        map: &serde_json::Map<String, serde_json::Value>,
    ) -> Result<CriteoLikeConfig, Failure> {
        let mut map = map.clone();
        map.entry("seed").or_insert(serde_json::Value::from(0u64));
        serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| Failure::config(format!("data.criteo_like: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confounding: Option<ConfoundingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy: Option<ProxyConfig>,
    /// Proxy only; defaults to the Criteo-like generator's defaults.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<ProxyData>,
    /// Report directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        match self.experiment {
            ExperimentKind::Confounding => {
                let Some(c) = &self.confounding else {
                    return Err(Failure::config(
                        "experiment `confounding` needs a `confounding` section",
                    ));
                };
                if self.proxy.is_some() || self.data.is_some() {
                    return Err(Failure::config(
                        "`proxy` and `data` apply to the proxy experiment only",
                    ));
                }
                c.validate()?;
            }
            ExperimentKind::Proxy => {
                let Some(p) = &self.proxy else {
                    return Err(Failure::config(
                        "experiment `proxy` needs a `proxy` section",
                    ));
                };
                if self.confounding.is_some() {
                    return Err(Failure::config(
                        "`confounding` applies to the confounding experiment only",
                    ));
                }
                p.validate()?;
                if let Some(ProxyData::CriteoLike(map)) = &self.data {
                    ProxyData::criteo_like(map)?.validate()?;
                }
            }
        }
        Ok(())
    }
}
