//! One test per acceptance criterion. Each prints a single PASS/FAIL line
//! (written straight to stdout so it shows without `--nocapture`) before
//! asserting.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cdm_core::eval::{oracle_regret, true_effect_mse, uplift_curve};
use cdm_core::policy::threshold_policy;
use cdm_core::reduction::{
    fit_policy_tree, regret_equivalence_check, to_full_information_classification,
    to_weighted_classification,
};
use cdm_core::sim::{
    analytic_wrong_prob, run_confounding_experiment, run_proxy_experiment, run_scenario,
    ConfoundingConfig, ProxyConfig, ProxyMethod, ProxySource, ScenarioConfig,
};
use cdm_core::synth::{
    gen_rct, ConfoundingDirection, CriteoLikeConfig, DgpConfig, EffectForm, OutcomeKind,
};
use cdm_core::trees::{fit_causal_tree, TreeNode};
use cdm_core::{Dataset, FnEffect, FnPolicy, Policy, Sample, TreatmentLevel, TreeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tempfile::TempDir;

fn report(id: u32, pass: bool, elapsed: Duration, detail: String) {
    let line = format!(
        "acceptance {id:>2}: {} ({:.1} s) {detail}\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Standard normal CDF through the positive-term erf series.
fn phi_series(x: f64) -> f64 {
    let z = x.abs() / std::f64::consts::SQRT_2;
    let (mut term, mut sum, mut n) = (z, z, 0.0);
    while term > 1e-18 * sum {
        n += 1.0;
        term *= 2.0 * z * z / (2.0 * n + 1.0);
        sum += term;
    }
    let erf = 2.0 / std::f64::consts::PI.sqrt() * (-z * z).exp() * sum;
    0.5 * (1.0 + erf.copysign(x))
}

#[test]
fn criterion_01_decision_scenarios() {
    let start = Instant::now();
    let results: Vec<_> = ScenarioConfig::default_panels(2024)
        .iter()
        .map(|c| run_scenario(c).unwrap())
        .collect();
    let mut ok = true;
    let mut worst_z: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for (r, bm_mean) in results.iter().zip([-0.2, 0.5, 1.5]) {
        // wrong decision: estimate <= 0 when the true effect 1 is positive
        let bm = phi_series(-bm_mean / 0.35);
        let um = phi_series(-1.0 / 0.7);
        worst_oracle = worst_oracle
            .max((r.bm_wrong_analytic - bm).abs())
            .max((r.um_wrong_analytic - um).abs())
            .max((analytic_wrong_prob(bm_mean, 0.35, 0.0, true).unwrap() - bm).abs());
        for (emp, p) in [(r.bm_wrong_rate, bm), (r.um_wrong_rate, um)] {
            let se = (p * (1.0 - p) / r.n_draws as f64).sqrt();
            worst_z = worst_z.max((emp - p).abs() / se);
        }
        ok &= r.n_draws == 100_000;
    }
    ok &= worst_z < 4.0 && worst_oracle < 1e-9;
    let (bm_a, bm_c, um) = (
        results[0].bm_wrong_rate,
        results[2].bm_wrong_rate,
        results[2].um_wrong_rate,
    );
    ok &= (bm_a - 0.716).abs() < 0.005 && bm_a > 0.5;
    ok &= bm_c < um && (um - 0.0766).abs() < 0.005;
    let t = start.elapsed();
    ok &= t < Duration::from_secs(5);
    report(
        1,
        ok,
        t,
        format!("bm(a)={bm_a:.4} bm(c)={bm_c:.4} um={um:.4} max|z|={worst_z:.2} oracle gap={worst_oracle:.1e}"),
    );
}

/// Largest total reward over axis-aligned trees of depth <= `depth`, each leaf
/// taking the better arm for its rows. Cuts sit between distinct values.
fn best_reward(rows: &[(Vec<f64>, [f64; 2])], depth: usize) -> f64 {
    let leaf = {
        let s0: f64 = rows.iter().map(|r| r.1[0]).sum();
        let s1: f64 = rows.iter().map(|r| r.1[1]).sum();
        s0.max(s1)
    };
    if depth == 0 || rows.len() < 2 {
        return leaf;
    }
    let mut best = leaf;
    for j in 0..rows[0].0.len() {
        let mut v: Vec<f64> = rows.iter().map(|r| r.0[j]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        for w in v.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<_>, Vec<_>) = rows.iter().cloned().partition(|r| r.0[j] <= t);
            best = best.max(best_reward(&l, depth - 1) + best_reward(&r, depth - 1));
        }
    }
    best
}

#[test]
fn criterion_02_policy_tree_matches_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut optimal = 0;
    let mut worst_gap: f64 = 0.0;
    for i in 0..100 {
        let p = rng.random_range(1..=3);
        let coefs = |rng: &mut ChaCha8Rng| {
            (0..p)
                .map(|_| rng.random_range(-1.0..1.0))
                .collect::<Vec<f64>>()
        };
        let mut c = DgpConfig::rct(12, coefs(&mut rng), coefs(&mut rng), 500 + i);
        c.effect_intercept = rng.random_range(-0.5..0.5);
        c.outcome_noise_sd = 1.0;
        let d = gen_rct::<f64>(&c).unwrap();

        let params = TreeParams {
            max_depth: 2,
            min_leaf: 1,
            ..TreeParams::default()
        };
        let tree =
            fit_policy_tree(&to_full_information_classification(&d).unwrap(), &params).unwrap();
        let rows: Vec<(Vec<f64>, [f64; 2])> = d
            .samples()
            .iter()
            .map(|s| {
                (
                    s.features.clone(),
                    s.oracle.as_ref().unwrap().potential_outcomes,
                )
            })
            .collect();
        let ceiling: f64 = rows.iter().map(|r| r.1[0].max(r.1[1])).sum();
        let min_regret = (ceiling - best_reward(&rows, 2)) / 12.0;
        let got = oracle_regret(&tree, &d).unwrap().value;
        let gap = got - min_regret;
        worst_gap = worst_gap.max(gap);
        if gap <= 1e-9 {
            optimal += 1;
        }
    }
    let t = start.elapsed();
    let ok = optimal == 100 && t < Duration::from_secs(60);
    report(
        2,
        ok,
        t,
        format!("{optimal}/100 optimal, worst excess regret {worst_gap:.2e}"),
    );
}

#[test]
fn criterion_03_weighted_error_ips_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(5..200);
        let samples: Vec<Sample<f64>> = (0..n)
            .map(|_| {
                let x = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let t = TreatmentLevel::from_bool(rng.random_bool(0.5));
                Sample::new(x, t, rng.random_range(-4.0..6.0))
                    .with_propensity(rng.random_range(0.05..0.95))
            })
            .collect();
        let d = Dataset::new("log", samples).unwrap();
        let (a, b, flip) = (
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_bool(0.5),
        );
        let policy =
            FnPolicy(move |x: &[f64]| TreatmentLevel::from_bool((x[0] + b * x[1] > a) != flip));

        let w = to_weighted_classification(&d).unwrap();
        let c = w.outcome_offset();
        let nf = n as f64;
        // IPS value of shifted outcomes, computed here
        let ips = |p: &dyn Policy<f64>| -> f64 {
            d.samples()
                .iter()
                .filter(|s| p.assign(&s.features) == s.treatment)
                .map(|s| {
                    let e = s.propensity.unwrap();
                    let q = if s.treatment.is_treated() { e } else { 1.0 - e };
                    (s.outcome + c) / q
                })
                .sum::<f64>()
                / nf
        };
        let lhs = ips(&policy) + w.weighted_error(&policy) / nf;
        let reference = FnPolicy(|_: &[f64]| TreatmentLevel::TREATED);
        let rhs = ips(&reference) + w.weighted_error(&reference) / nf;
        let lib = regret_equivalence_check(&d, &policy).unwrap();
        worst = worst
            .max((lhs - rhs).abs())
            .max((lib.ips_value + lib.weighted_error - lhs).abs());
    }
    let t = start.elapsed();
    report(
        3,
        worst < 1e-9,
        t,
        format!("max deviation {worst:.2e} over 100 pairs"),
    );
}

#[test]
fn criterion_04_transformed_outcome_unbiased() {
    let start = Instant::now();
    let mut c = DgpConfig::rct(100_000, vec![1.0, -0.5, 0.25], vec![0.0; 3], 4);
    c.effect_intercept = 0.3;
    c.outcome_noise_sd = 1.0;
    let d = gen_rct::<f64>(&c).unwrap();
    let ystar: Vec<f64> = d
        .samples()
        .iter()
        .map(|s| {
            let e = s.propensity.unwrap();
            let t = if s.treatment.is_treated() { 1.0 } else { 0.0 };
            s.outcome * (t - e) / (e * (1.0 - e))
        })
        .collect();
    let (m, se) = mean_se(&ystar);
    let t = start.elapsed();
    report(
        4,
        (m - 0.3).abs() < 3.0 * se,
        t,
        format!("mean Y* {m:.4} se {se:.4}"),
    );
}

#[test]
fn criterion_05_mse_and_regret_diverge() {
    let start = Instant::now();
    let d = Dataset::new(
        "one-unit",
        vec![
            Sample::synthetic(vec![0.0], TreatmentLevel::TREATED, [0.0, 0.5], 0.5)
                .with_propensity(0.5),
        ],
    )
    .unwrap();
    let a = FnEffect(|_: &[f64]| 3.5);
    let b = FnEffect(|_: &[f64]| -0.5);
    let mse_a = true_effect_mse(&a, &d).unwrap().value;
    let mse_b = true_effect_mse(&b, &d).unwrap().value;
    let reg_a = oracle_regret(&threshold_policy(a, 0.0).unwrap(), &d)
        .unwrap()
        .value;
    let reg_b = oracle_regret(&threshold_policy(b, 0.0).unwrap(), &d)
        .unwrap()
        .value;
    let ok = mse_a == 9.0 && mse_b == 1.0 && reg_a == 0.0 && reg_b == 0.5;
    report(
        5,
        ok,
        start.elapsed(),
        format!("mse A {mse_a} B {mse_b}, regret A {reg_a} B {reg_b}"),
    );
}

#[test]
fn criterion_06_causal_tree_recovers_subgroups() {
    let start = Instant::now();
    let params = TreeParams {
        max_depth: 1,
        ..TreeParams::default()
    };
    let mut good = 0;
    for seed in 0..100 {
        let mut c = DgpConfig::rct(
            5_000,
            vec![0.5, 0.0, -0.25],
            vec![1.0, 0.0, 0.0],
            6_000 + seed,
        );
        c.effect_form = EffectForm::Step;
        let d = gen_rct::<f64>(&c).unwrap();
        let tree = fit_causal_tree(&d, &params).unwrap();
        let split_on_0 = matches!(
            tree.tree().nodes()[0],
            TreeNode::Internal {
                feature_index: 0,
                ..
            }
        );
        let lo = tree.tree().predict(&[-1.0, 0.0, 0.0]);
        let hi = tree.tree().predict(&[1.0, 0.0, 0.0]);
        if split_on_0 && (lo + 1.0).abs() < 0.1 && (hi - 1.0).abs() < 0.1 {
            good += 1;
        }
    }
    report(
        6,
        good >= 95,
        start.elapsed(),
        format!("{good}/100 runs recovered the split"),
    );
}

#[test]
fn criterion_07_uplift_invariants() {
    let start = Instant::now();
    let mut ok = true;

    // endpoints on an RCT with real effects
    let mut c = DgpConfig::rct(20_000, vec![0.5, -0.3], vec![1.0, 0.4], 71);
    c.outcome_noise_sd = 1.0;
    let d = gen_rct::<f64>(&c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let scores: Vec<f64> = (0..d.len()).map(|_| rng.random()).collect();
    let curve = uplift_curve(&scores, &d, 50).unwrap();
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0.0, 0.0, 0.0);
    for s in d.samples() {
        if s.treatment.is_treated() {
            s1 += s.outcome;
            n1 += 1.0;
        } else {
            s0 += s.outcome;
            n0 += 1.0;
        }
    }
    let end = (s1 / n1 - s0 / n0) * d.len() as f64;
    let first = curve.points[0];
    let last = *curve.points.last().unwrap();
    ok &= first.fraction == 0.0 && first.incremental_outcome == 0.0;
    ok &= last.fraction == 1.0 && last.incremental_outcome == end;

    // null effect: every grid point within 3 standard errors of zero
    let mut null = DgpConfig::rct(20_000, vec![0.3, -0.2], vec![0.0, 0.0], 73);
    null.outcome_kind = OutcomeKind::Bernoulli;
    let d = gen_rct::<f64>(&null).unwrap();
    let scores: Vec<f64> = (0..d.len()).map(|_| rng.random()).collect();
    let curve = uplift_curve(&scores, &d, 100).unwrap();
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut worst_z: f64 = 0.0;
    for (g, p) in curve.points.iter().enumerate().skip(1) {
        let k = (g * d.len()).div_ceil(100);
        let arm = |t: bool| -> Vec<f64> {
            order[..k]
                .iter()
                .map(|&i| &d.samples()[i])
                .filter(|s| s.treatment.is_treated() == t)
                .map(|s| s.outcome)
                .collect()
        };
        let (_, se1) = mean_se(&arm(true));
        let (_, se0) = mean_se(&arm(false));
        let se = k as f64 * (se1 * se1 + se0 * se0).sqrt();
        worst_z = worst_z.max(p.incremental_outcome.abs() / se);
    }
    ok &= worst_z < 3.0;
    report(
        7,
        ok,
        start.elapsed(),
        format!(
            "curve(1)={:.4} vs N*DiM={end:.4}, null max|z|={worst_z:.2}",
            last.incremental_outcome
        ),
    );
}

fn confounding(direction: ConfoundingDirection, gamma: f64, loading: f64) -> ConfoundingConfig {
    let mut dgp = DgpConfig::rct(1, vec![0.0, 1.0], vec![1.0, 0.0], 0);
    dgp.outcome_noise_sd = 1.0;
    dgp.confounding_strength = gamma;
    dgp.confounder_loading = loading;
    dgp.confounding_direction = direction;
    ConfoundingConfig {
        dgp,
        n_confounded: 100_000,
        n_experimental: 1_000,
        n_test: 20_000,
        learner: TreeParams {
            max_depth: 3,
            min_leaf: 25,
            ..TreeParams::default()
        },
        threshold: 0.0,
        n_reps: 50,
        seed: 7,
    }
}

#[test]
fn criterion_08_confounded_data_can_win() {
    let start = Instant::now();
    let reinforcing =
        run_confounding_experiment(&confounding(ConfoundingDirection::Reinforcing, 1.0, 0.5))
            .unwrap();
    let opposing =
        run_confounding_experiment(&confounding(ConfoundingDirection::Opposing, 2.0, 2.0)).unwrap();
    let conf_wins = reinforcing
        .reps
        .iter()
        .filter(|r| r.regret_confounded < r.regret_experimental)
        .count();
    let exp_wins = opposing
        .reps
        .iter()
        .filter(|r| r.regret_experimental < r.regret_confounded)
        .count();
    let t = start.elapsed();
    let ok = conf_wins >= 40 && exp_wins >= 40 && t < Duration::from_secs(600);
    report(
        8,
        ok,
        t,
        format!("reinforcing: confounded wins {conf_wins}/50; opposing: experimental wins {exp_wins}/50"),
    );
}

fn proxy(train_size: usize) -> ProxyConfig {
    ProxyConfig {
        learner: TreeParams {
            max_depth: 3,
            min_leaf: 100,
            ..TreeParams::default()
        },
        train_sizes: vec![train_size],
        test_size: 200_000,
        n_reps: 30,
        seed: 1000,
        methods: vec![ProxyMethod::OutcomeTree, ProxyMethod::CausalTree],
        n_grid: 100,
        tune: None,
    }
}

fn median_auuc(source: &ProxySource, config: &ProxyConfig) -> BTreeMap<ProxyMethod, f64> {
    let r = run_proxy_experiment(source, config).unwrap();
    config
        .methods
        .iter()
        .map(|&m| {
            (
                m,
                median(
                    r.runs
                        .iter()
                        .filter(|run| run.method == m)
                        .map(|run| run.auuc)
                        .collect(),
                ),
            )
        })
        .collect()
}

#[test]
fn criterion_09_proxy_targeting() {
    let start = Instant::now();
    let default = median_auuc(
        &ProxySource::Generated(CriteoLikeConfig::default()),
        &proxy(5_000),
    );
    let reversed_source = ProxySource::Generated(CriteoLikeConfig {
        effect_outcome_corr: -1.0,
        ..CriteoLikeConfig::default()
    });
    let reversed = median_auuc(&reversed_source, &proxy(50_000));
    let (o, c) = (
        default[&ProxyMethod::OutcomeTree],
        default[&ProxyMethod::CausalTree],
    );
    let (ro, rc) = (
        reversed[&ProxyMethod::OutcomeTree],
        reversed[&ProxyMethod::CausalTree],
    );
    let t = start.elapsed();
    let ok = o > c && rc > ro && t < Duration::from_secs(900);
    report(
        9,
        ok,
        t,
        format!("default n=5000: outcome {o:.1} causal {c:.1}; corr -1 n=50000: outcome {ro:.1} causal {rc:.1}"),
    );
}

fn cdm(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_cdm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

/// Every file under `dir`, keyed by relative path.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// Runs every subcommand in a fresh directory and returns stdout per step
/// plus the resulting files.
fn pipeline() -> (Vec<Vec<u8>>, BTreeMap<String, Vec<u8>>) {
    let dir = TempDir::new().unwrap();
    let p = dir.path();
    let put = |name: &str, v: serde_json::Value| fs::write(p.join(name), v.to_string()).unwrap();
    let dgp = json!({
        "n_samples": 2000, "n_features": 3, "baseline_coefs": [0.5, 0.0, -0.25],
        "effect_coefs": [1.0, -0.5, 0.0], "outcome_noise_sd": 1.0, "seed": 10
    });
    put(
        "gen.json",
        json!({ "generator": "rct", "dgp": dgp, "output": "train.csv", "include_oracle": true }),
    );
    let mut test_dgp = dgp.clone();
    test_dgp["seed"] = json!(11);
    put(
        "gen_test.json",
        json!({ "generator": "rct", "dgp": test_dgp, "output": "test.csv", "include_oracle": true }),
    );
    put(
        "gen_criteo.json",
        json!({ "generator": "criteo_like", "criteo_like": { "n_samples": 4000, "seed": 12 }, "output": "criteo.csv" }),
    );
    let mut steps = vec![
        ("gen", "gen.json"),
        ("gen", "gen_test.json"),
        ("gen", "gen_criteo.json"),
    ];
    for (method, extra) in [
        ("outcome-tree", json!({ "arm": 1 })),
        (
            "causal-tree",
            json!({ "params": { "max_depth": 2, "min_leaf": 30, "honest": true, "seed": 3 } }),
        ),
        ("two-model", json!({})),
        ("policy-tree", json!({})),
    ] {
        let mut cfg = json!({ "input": "train.csv", "method": method, "model_output": format!("{method}.json") });
        for (k, v) in extra.as_object().unwrap() {
            cfg[k] = v.clone();
        }
        put(&format!("train_{method}.json"), cfg);
        put(
            &format!("eval_{method}.json"),
            json!({
                "model": format!("out/{method}.json"), "test": "test.csv",
                "metrics": ["oracle-regret", "ips-value", "uplift-curve", "decision-error-rate"],
                "curve_output": format!("curve_{method}.csv")
            }),
        );
    }
    put(
        "tune.json",
        json!({
            "input": "train.csv", "method": "causal-tree", "model_output": "tuned.json",
            "tune": { "grid": { "max_depth": [1, 2], "min_leaf": [20, 80] }, "folds": 3 }
        }),
    );
    put(
        "simulate.json",
        json!({ "default_panels_seed": 5, "scenarios": [{ "bm_mean": 0.2, "n_draws": 5000, "seed": 1 }] }),
    );
    put(
        "confounding.json",
        json!({
            "experiment": "confounding",
            "confounding": {
                "dgp": dgp, "n_confounded": 1000, "n_experimental": 200, "n_test": 1000,
                "learner": { "max_depth": 2, "min_leaf": 20 }, "n_reps": 3, "seed": 4
            }
        }),
    );
    put(
        "proxy.json",
        json!({
            "experiment": "proxy",
            "proxy": { "learner": { "max_depth": 2, "min_leaf": 50 }, "train_sizes": [1000], "test_size": 3000, "n_reps": 2, "seed": 6, "n_grid": 20 },
            "data": { "csv": { "path": "criteo.csv" } }
        }),
    );

    let mut stdouts: Vec<Vec<u8>> = steps
        .drain(..)
        .map(|(cmd, cfg)| cdm(p, &[cmd, "--config", cfg]))
        .collect();
    for method in ["outcome-tree", "causal-tree", "two-model", "policy-tree"] {
        stdouts.push(cdm(
            p,
            &[
                "train",
                "--config",
                &format!("train_{method}.json"),
                "--out",
                "out",
            ],
        ));
        stdouts.push(cdm(
            p,
            &[
                "eval",
                "--config",
                &format!("eval_{method}.json"),
                "--out",
                "out",
            ],
        ));
    }
    stdouts.push(cdm(p, &["train", "--config", "tune.json", "--out", "out"]));
    stdouts.push(cdm(p, &["simulate", "--config", "simulate.json"]));
    stdouts.push(cdm(
        p,
        &[
            "experiment",
            "--config",
            "confounding.json",
            "--out",
            "conf",
        ],
    ));
    stdouts.push(cdm(
        p,
        &["experiment", "--config", "proxy.json", "--out", "proxy"],
    ));
    (stdouts, snapshot(p))
}

#[test]
fn criterion_10_cli_is_deterministic() {
    let start = Instant::now();
    let (out_a, files_a) = pipeline();
    let (out_b, files_b) = pipeline();
    let differing: Vec<&String> = files_a
        .iter()
        .filter(|(k, v)| files_b.get(*k) != Some(v))
        .map(|(k, _)| k)
        .collect();
    let stdout_same = out_a == out_b;
    let ok = stdout_same && differing.is_empty() && files_a.len() == files_b.len();
    report(
        10,
        ok,
        start.elapsed(),
        format!(
            "{} invocations, {} files compared, stdout identical: {stdout_same}, differing files: {differing:?}",
            out_a.len(),
            files_a.len()
        ),
    );
}
