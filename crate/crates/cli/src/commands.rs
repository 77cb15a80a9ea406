use std::fs;
use std::path::{Path, PathBuf};

use cdm_core::eval::{
    decision_error_rate, effect_mse, ips_policy_value, oracle_regret, true_effect_mse,
    uplift_curve, uplift_report,
};
use cdm_core::ingest::{infer_schema, load_csv, write_csv, CsvSchema, LoadOptions, Loaded};
use cdm_core::reduction::{
    fit_policy_tree, to_full_information_classification, to_weighted_classification,
};
use cdm_core::sim::{run_confounding_experiment, run_proxy_experiment, run_scenario, ProxySource};
use cdm_core::synth::{gen_confounded, gen_criteo_like, gen_rct, CriteoLikeConfig};
use cdm_core::trees::{
    cross_validate, fit_causal_tree, fit_outcome_tree, fit_two_model, load_model, save_model,
    SavedModel, TunedMethod,
};
use cdm_core::{Dataset, EvaluationReport, OutcomeModel, TreatmentLevel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    read_json, EvalConfig, ExperimentConfig, ExperimentKind, GenConfig, Generator, Metric,
    ProxyData, Reduction, SimulateConfig, TrainConfig, TrainMethod, REPORT_FORMAT_VERSION,
};
use crate::failure::Failure;
use crate::Common;

fn envelope(command: &str, config: &impl Serialize) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("format_version".into(), json!(REPORT_FORMAT_VERSION));
    m.insert("command".into(), json!(command));
    m.insert(
        "config".into(),
        serde_json::to_value(config).expect("configs serialize"),
    );
    m
}

/// Output paths resolve against `--out` when it is given.
fn output_path(common: &Common, path: &Path) -> Result<PathBuf, Failure> {
    let Some(dir) = &common.out else {
        return Ok(path.to_path_buf());
    };
    fs::create_dir_all(dir)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.join(path))
}

fn ensure_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p)
            .map_err(|e| Failure::io(format!("cannot create {}: {e}", p.display()))),
        _ => Ok(()),
    }
}

fn resolve_schema(
    common: &Common,
    embedded: Option<&CsvSchema>,
    data: &Path,
) -> Result<CsvSchema, Failure> {
    if let Some(s) = embedded {
        return Ok(s.clone());
    }
    if let Some(p) = &common.schema {
        return read_json(p, "schema");
    }
    Ok(infer_schema(data)?)
}

fn load(
    common: &Common,
    embedded: Option<&CsvSchema>,
    path: &Path,
) -> Result<Loaded<f64>, Failure> {
    let schema = resolve_schema(common, embedded, path)?;
    let loaded = load_csv(
        path,
        &schema,
        LoadOptions {
            skip_bad_rows: common.skip_bad_rows,
        },
    )?;
    for msg in &loaded.skipped {
        eprintln!("skipped {msg}");
    }
    Ok(loaded)
}

pub fn gen(common: &Common) -> Result<Value, Failure> {
    let config: GenConfig = read_json(&common.config, "config")?;
    config.validate()?;
    let data: Dataset<f64> = match (config.generator, &config.dgp, &config.criteo_like) {
        (Generator::Rct, Some(dgp), _) => gen_rct(dgp)?,
        (Generator::Confounded, Some(dgp), _) => gen_confounded(dgp)?,
        (Generator::CriteoLike, _, Some(c)) => gen_criteo_like(c)?,
        _ => unreachable!("validated"),
    };
    let out = output_path(common, &config.output)?;
    ensure_parent(&out)?;
    write_csv(&data, &out, config.include_oracle)?;
    eprintln!("wrote {} rows to {}", data.len(), out.display());

    let mut doc = envelope("gen", &config);
    doc.insert("output".into(), json!(out));
    doc.insert("n".into(), json!(data.len()));
    doc.insert("n_features".into(), json!(data.n_features()));
    doc.insert("treated_fraction".into(), json!(data.treated_fraction()));
    doc.insert("oracle_ate".into(), json!(data.oracle_ate()));
    Ok(Value::Object(doc))
}

fn arm_rows_mse(
    model: &impl OutcomeModel<f64>,
    data: &Dataset<f64>,
    arm: Option<TreatmentLevel>,
) -> Option<f64> {
    let terms: Vec<f64> = data
        .samples()
        .iter()
        .filter(|s| arm.is_none_or(|a| s.treatment == a))
        .map(|s| (s.outcome - model.predict_outcome(&s.features)).powi(2))
        .collect();
    (!terms.is_empty()).then(|| terms.iter().sum::<f64>() / terms.len() as f64)
}

pub fn train(common: &Common) -> Result<Value, Failure> {
    let config: TrainConfig = read_json(&common.config, "config")?;
    config.validate()?;
    let loaded = load(common, config.schema.as_ref(), &config.input)?;
    let data = &loaded.dataset;

    let mut params = config.params.clone();
    let mut cv = None;
    if let Some(tune) = &config.tune {
        let method = match config.method {
            TrainMethod::OutcomeTree => TunedMethod::OutcomeTree {
                arm: config.arm.map(|a| TreatmentLevel::from_bool(a == 1)),
            },
            _ => TunedMethod::CausalTree,
        };
        let (best, scores) =
            cross_validate(data, method, &params, &tune.grid, tune.folds, params.seed)?;
        params = best;
        cv = Some(scores);
    }

    let (model, metric_name, metric): (SavedModel<f64>, &str, Option<f64>) = match config.method {
        TrainMethod::OutcomeTree => {
            let arm = config.arm.map(|a| TreatmentLevel::from_bool(a == 1));
            let m = fit_outcome_tree(data, arm, &params)?;
            let mse = arm_rows_mse(&m, data, arm);
            (m.into(), "outcome_mse", mse)
        }
        TrainMethod::CausalTree => {
            let m = fit_causal_tree(data, &params)?;
            let v = effect_mse(&m, data)?.value;
            (m.into(), "effect_mse", Some(v))
        }
        TrainMethod::TwoModel => {
            let m = fit_two_model(data, &params)?;
            let v = if data.has_propensities() {
                Some(effect_mse(&m, data)?.value)
            } else {
                None
            };
            (m.into(), "effect_mse", v)
        }
        TrainMethod::PolicyTree => {
            let wset = match config.reduction {
                Reduction::Ips => to_weighted_classification(data)?,
                Reduction::FullInformation => to_full_information_classification(data)?,
            };
            let m = fit_policy_tree(&wset, &params)?;
            let v = wset.weighted_error(&m) / wset.total_weight();
            (m.into(), "normalized_weighted_error", Some(v))
        }
    };

    let out = output_path(common, &config.model_output)?;
    ensure_parent(&out)?;
    save_model(&model, &out)?;
    let (depth, n_leaves) = match &model {
        SavedModel::Outcome { tree, .. }
        | SavedModel::Causal { tree }
        | SavedModel::Policy { tree } => (tree.depth(), tree.n_leaves()),
        SavedModel::TwoModel { control, treated } => (
            control.depth().max(treated.depth()),
            control.n_leaves() + treated.n_leaves(),
        ),
    };
    eprintln!(
        "trained {} model (depth {depth}) on {} rows",
        model.kind(),
        data.len()
    );

    let mut doc = envelope("train", &config);
    doc.insert("model_output".into(), json!(out));
    doc.insert("kind".into(), json!(model.kind()));
    doc.insert("n_train".into(), json!(data.len()));
    doc.insert("skipped_rows".into(), json!(loaded.skipped));
    doc.insert("depth".into(), json!(depth));
    doc.insert("n_leaves".into(), json!(n_leaves));
    doc.insert("params".into(), json!(params));
    doc.insert(
        "train_metric".into(),
        json!({ "metric": metric_name, "value": metric }),
    );
    if let Some(cv) = cv {
        doc.insert("cv_scores".into(), json!(cv));
    }
    Ok(Value::Object(doc))
}

pub fn eval(common: &Common) -> Result<Value, Failure> {
    let config: EvalConfig = read_json(&common.config, "config")?;
    config.validate()?;
    let saved = load_model::<f64>(&config.model)?;
    let kind = saved.kind();
    let fitted = saved.into_fitted();
    let loaded = load(common, config.schema.as_ref(), &config.test)?;
    let test = &loaded.dataset;

    let no_effect = |m: Metric| {
        Failure::precondition(format!(
            "metric {} needs effect predictions; a `{kind}` model has none",
            serde_json::to_value(m).expect("metric names serialize")
        ))
    };
    let mut reports: Vec<EvaluationReport> = Vec::new();
    let mut curve_path = None;
    for &metric in &config.metrics {
        let report = match metric {
            Metric::EffectMse => effect_mse(
                fitted.effect_model().ok_or_else(|| no_effect(metric))?,
                test,
            )?,
            Metric::TrueEffectMse => true_effect_mse(
                fitted.effect_model().ok_or_else(|| no_effect(metric))?,
                test,
            )?,
            Metric::OracleRegret => oracle_regret(fitted.policy(config.threshold)?.as_ref(), test)?,
            Metric::IpsValue => ips_policy_value(fitted.policy(config.threshold)?.as_ref(), test)?,
            Metric::DecisionErrorRate => {
                decision_error_rate(fitted.policy(config.threshold)?.as_ref(), test)?
            }
            Metric::UpliftCurve => {
                let curve = uplift_curve(&fitted.scores(test)?, test, config.n_grid)?;
                let rel = config
                    .curve_output
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("uplift_curve.csv"));
                let path = output_path(common, &rel)?;
                ensure_parent(&path)?;
                curve.write_csv(&path)?;
                eprintln!("wrote uplift curve to {}", path.display());
                curve_path = Some(path);
                uplift_report(&curve)
            }
        };
        reports.push(report);
    }

    let mut doc = envelope("eval", &config);
    doc.insert("model_kind".into(), json!(kind));
    doc.insert("n_test".into(), json!(test.len()));
    doc.insert("skipped_rows".into(), json!(loaded.skipped));
    doc.insert("reports".into(), json!(reports));
    if let Some(p) = curve_path {
        doc.insert("curve_output".into(), json!(p));
    }
    Ok(Value::Object(doc))
}

pub fn simulate(common: &Common) -> Result<Value, Failure> {
    let config: SimulateConfig = read_json(&common.config, "config")?;
    let scenarios = config.all_scenarios()?;
    let results = scenarios
        .iter()
        .map(run_scenario)
        .collect::<cdm_core::Result<Vec<_>>>()?;
    eprintln!("ran {} scenarios", results.len());
    let mut doc = envelope("simulate", &config);
    doc.insert("results".into(), json!(results));
    Ok(Value::Object(doc))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}

pub fn experiment(common: &Common) -> Result<Value, Failure> {
    let config: ExperimentConfig = read_json(&common.config, "config")?;
    config.validate()?;
    let dir = common
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| Failure::config("no output directory: pass --out or set `output_dir`"))?;
    fs::create_dir_all(&dir)
        .map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))?;

    let mut doc = envelope("experiment", &config);
    match config.experiment {
        ExperimentKind::Confounding => {
            let c = config.confounding.as_ref().expect("validated");
            let report = run_confounding_experiment(c)?;
            for r in &report.reps {
                eprintln!(
                    "rep {}: regret confounded {:.6} experimental {:.6}",
                    r.rep, r.regret_confounded, r.regret_experimental
                );
            }
            doc.insert("reports".into(), json!(report.to_reports()));
            doc.insert("result".into(), json!(report));
        }
        ExperimentKind::Proxy => {
            let p = config.proxy.as_ref().expect("validated");
            let source = match &config.data {
                None => ProxySource::Generated(CriteoLikeConfig::default()),
                Some(ProxyData::CriteoLike(map)) => {
                    ProxySource::Generated(ProxyData::criteo_like(map)?)
                }
                Some(ProxyData::Csv { path, schema }) => {
                    let loaded = load(common, schema.as_ref(), path)?;
                    doc.insert("skipped_rows".into(), json!(loaded.skipped));
                    ProxySource::Loaded(loaded.dataset)
                }
            };
            let report = run_proxy_experiment(&source, p)?;
            let mut runs = Vec::with_capacity(report.runs.len());
            for r in &report.runs {
                let name = format!(
                    "curve_{}_n{}_rep{}.csv",
                    r.method.name(),
                    r.train_size,
                    r.rep
                );
                let path = dir.join(&name);
                r.curve.write_csv(&path)?;
                eprintln!(
                    "rep {} n {} {}: auuc {:.6}",
                    r.rep,
                    r.train_size,
                    r.method.name(),
                    r.auuc
                );
                let mut v = json!(r);
                let obj = v.as_object_mut().expect("runs serialize as objects");
                obj.remove("curve");
                obj.insert("curve_csv".into(), json!(name));
                obj.insert(
                    "empty_arm_fractions".into(),
                    json!(r.curve.empty_arm_fractions),
                );
                runs.push(v);
            }
            doc.insert("reports".into(), json!(report.to_reports()));
            doc.insert("summaries".into(), json!(report.summaries));
            doc.insert("runs".into(), Value::Array(runs));
        }
    }
    let report_path = dir.join("report.json");
    let value = Value::Object(doc);
    write_file(
        &report_path,
        &(serde_json::to_string_pretty(&value).expect("reports serialize") + "\n"),
    )?;
    eprintln!("wrote {}", report_path.display());
    Ok(value)
}
