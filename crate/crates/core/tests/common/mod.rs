//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use cdm_core::synth::{gen_rct, DgpConfig};
use cdm_core::Dataset;

/// One row for the exhaustive search: features plus the reward of assigning
/// each arm.
#[derive(Debug, Clone)]
pub struct Row {
    pub x: Vec<f64>,
    pub reward: [f64; 2],
}

fn leaf(rows: &[&Row]) -> f64 {
    let r0: f64 = rows.iter().map(|r| r.reward[0]).sum();
    let r1: f64 = rows.iter().map(|r| r.reward[1]).sum();
    r0.max(r1)
}

/// Every `(left, right)` partition produced by a single axis-aligned cut.
fn cuts<'a>(rows: &[&'a Row]) -> Vec<(Vec<&'a Row>, Vec<&'a Row>)> {
    let mut out = Vec::new();
    let Some(first) = rows.first() else {
        return out;
    };
    for j in 0..first.x.len() {
        let mut vals: Vec<f64> = rows.iter().map(|r| r.x[j]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<&Row>, Vec<&Row>) = rows.iter().partition(|r| r.x[j] <= thr);
            out.push((l, r));
        }
    }
    out
}

/// Largest total reward of any axis-aligned tree of depth at most `depth`.
pub fn best_tree_reward(rows: &[&Row], depth: usize) -> f64 {
    let mut best = leaf(rows);
    if depth > 0 {
        for (l, r) in cuts(rows) {
            best = best.max(best_tree_reward(&l, depth - 1) + best_tree_reward(&r, depth - 1));
        }
    }
    best
}

/// Small randomized dataset with noisy continuous outcomes.
pub fn small_rct(n: usize, n_features: usize, seed: u64) -> Dataset<f64> {
    let coef = |k: u64| {
        ((seed.wrapping_mul(6364136223846793005).wrapping_add(k) >> 33) % 2001) as f64 / 1000.0
            - 1.0
    };
    let baseline: Vec<f64> = (0..n_features as u64).map(coef).collect();
    let effect: Vec<f64> = (0..n_features as u64).map(|k| coef(k + 100)).collect();
    let mut c = DgpConfig::rct(n, baseline, effect, seed);
    c.effect_intercept = coef(999) / 2.0;
    c.outcome_noise_sd = 0.5;
    gen_rct(&c).unwrap()
}

/// Rows rewarding each arm by its potential outcome.
pub fn oracle_rows(d: &Dataset<f64>) -> Vec<Row> {
    d.samples()
        .iter()
        .map(|s| {
            let o = s.oracle.as_ref().unwrap();
            Row {
                x: s.features.clone(),
                reward: o.potential_outcomes,
            }
        })
        .collect()
}
