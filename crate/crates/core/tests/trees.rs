use std::collections::BTreeMap;

use cdm_core::eval::transformed_outcome;
use cdm_core::synth::{gen_rct, DgpConfig, EffectForm};
use cdm_core::trees::{
    cross_validate, fit_causal_tree, fit_outcome_tree, fit_two_model, predict_effect_batch,
    predict_outcome_batch, ParamGrid, TunedMethod,
};
use cdm_core::{
    CausalTree, Dataset, EffectModel, OutcomeModel, Sample, TreatmentLevel, TreeParams,
};
use proptest::prelude::*;

fn params(depth: usize, min_leaf: usize) -> TreeParams {
    TreeParams {
        max_depth: depth,
        min_leaf,
        ..TreeParams::default()
    }
}

fn sixteen_points() -> Dataset<f64> {
    let mut samples = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let (a, b) = (i as f64, j as f64 * 0.5);
            let y = 3.0 * f64::from(u8::from(a > 1.5))
                + f64::from(u8::from(b > 0.25))
                + 0.1 * ((i * 4 + j) % 3) as f64;
            samples.push(Sample::new(vec![a, b], TreatmentLevel::CONTROL, y));
        }
    }
    Dataset::new("grid", samples).unwrap()
}

fn sse(ys: &[f64]) -> f64 {
    if ys.is_empty() {
        return 0.0;
    }
    let m = ys.iter().sum::<f64>() / ys.len() as f64;
    ys.iter().map(|y| (y - m).powi(2)).sum()
}

/// Minimum SSE over all axis-aligned trees of the given depth, cutting at
/// midpoints of distinct values.
fn brute_sse(rows: &[(Vec<f64>, f64)], depth: usize) -> f64 {
    let mut best = sse(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    if depth == 0 || rows.is_empty() {
        return best;
    }
    for j in 0..rows[0].0.len() {
        let mut v: Vec<f64> = rows.iter().map(|r| r.0[j]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        for w in v.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<_>, Vec<_>) = rows.iter().cloned().partition(|r| r.0[j] <= t);
            best = best.min(brute_sse(&l, depth - 1) + brute_sse(&r, depth - 1));
        }
    }
    best
}

#[test]
fn depth_two_outcome_tree_matches_exhaustive_search() {
    let d = sixteen_points();
    let tree = fit_outcome_tree(&d, None, &params(2, 1)).unwrap();
    let fitted: f64 = d
        .samples()
        .iter()
        .map(|s| (s.outcome - tree.predict_outcome(&s.features)).powi(2))
        .sum();
    let rows: Vec<(Vec<f64>, f64)> = d
        .samples()
        .iter()
        .map(|s| (s.features.clone(), s.outcome))
        .collect();
    let best = brute_sse(&rows, 2);
    assert!((fitted - best).abs() < 1e-9, "tree {fitted} vs best {best}");
}

fn subgroup_dgp(n: usize, seed: u64) -> DgpConfig {
    let mut c = DgpConfig::rct(n, vec![0.5, 0.0, 0.0], vec![1.0, 0.0, 0.0], seed);
    c.effect_form = EffectForm::Step;
    c
}

#[test]
fn homogeneous_effect_gives_flat_leaves() {
    let mut c = DgpConfig::rct(20_000, vec![1.0, -0.5], vec![0.0, 0.0], 21);
    c.effect_intercept = 0.4;
    c.outcome_noise_sd = 1.0;
    let d = gen_rct::<f64>(&c).unwrap();
    let tree = fit_causal_tree(&d, &params(2, 500)).unwrap();
    // Each leaf holds at least 1000 units; the DiM standard error there is
    // below 2 * sqrt(4 * var / 1000) with var <= 1 + 1.25.
    for s in d.samples() {
        let est = tree.predict_effect(&s.features);
        assert!((est - 0.4).abs() < 0.2, "{est}");
    }
    let gated = fit_causal_tree(
        &d,
        &TreeParams {
            min_split_gain: 1e3,
            ..params(2, 500)
        },
    )
    .unwrap();
    assert_eq!(gated.tree().n_leaves(), 1);
}

#[test]
fn two_model_signs_on_subgroups() {
    let train = gen_rct::<f64>(&subgroup_dgp(5_000, 1)).unwrap();
    let test = gen_rct::<f64>(&subgroup_dgp(5_000, 2)).unwrap();
    let m = fit_two_model(&train, &params(3, 20)).unwrap();
    let agree = test
        .samples()
        .iter()
        .filter(|s| {
            let cate = s.oracle.as_ref().unwrap().true_cate;
            (m.predict_effect(&s.features) > 0.0) == (cate > 0.0)
        })
        .count();
    assert!(agree as f64 >= 0.95 * test.len() as f64, "{agree}");
}

#[test]
fn batch_prediction_matches_scalar_calls() {
    let train = gen_rct::<f64>(&subgroup_dgp(2_000, 3)).unwrap();
    let test = gen_rct::<f64>(&subgroup_dgp(1_000, 4)).unwrap();
    let causal = fit_causal_tree(&train, &params(3, 30)).unwrap();
    let outcome = fit_outcome_tree(&train, Some(TreatmentLevel::TREATED), &params(3, 30)).unwrap();

    let eff = predict_effect_batch(&causal, &test).unwrap();
    let out = predict_outcome_batch(&outcome, &test).unwrap();
    for (i, s) in test.samples().iter().enumerate() {
        assert_eq!(eff[i], causal.predict_effect(&s.features));
        assert_eq!(out[i], outcome.predict_outcome(&s.features));
    }

    let one = test.select(&[7], "one").unwrap();
    assert_eq!(predict_effect_batch(&causal, &one).unwrap(), vec![eff[7]]);

    let order: Vec<usize> = (0..test.len()).rev().collect();
    let rev = predict_effect_batch(&causal, &test.select(&order, "rev").unwrap()).unwrap();
    assert!(rev.iter().zip(order.iter()).all(|(v, &i)| *v == eff[i]));
}

#[test]
fn fits_are_reproducible() {
    let d = gen_rct::<f64>(&subgroup_dgp(3_000, 5)).unwrap();
    let p = TreeParams {
        honest: true,
        seed: 17,
        ..params(3, 20)
    };
    assert_eq!(
        fit_causal_tree(&d, &p).unwrap(),
        fit_causal_tree(&d, &p).unwrap()
    );
}

#[test]
fn ipw_difference_in_means_at_depth_zero() {
    let mut c = DgpConfig::rct(4_000, vec![1.0, 0.2], vec![0.5, -1.0], 8);
    c.outcome_noise_sd = 1.0;
    c.confounding_strength = 1.0;
    c.confounder_loading = 0.5;
    let d = cdm_core::synth::gen_confounded::<f64>(&c).unwrap();
    assert!(d.constant_propensity().is_none());
    let tree = fit_causal_tree(&d, &params(0, 1)).unwrap();
    let (mut n1, mut d1, mut n0, mut d0) = (0.0, 0.0, 0.0, 0.0);
    for s in d.samples() {
        let e = s.propensity.unwrap();
        if s.treatment.is_treated() {
            n1 += s.outcome / e;
            d1 += 1.0 / e;
        } else {
            n0 += s.outcome / (1.0 - e);
            d0 += 1.0 / (1.0 - e);
        }
    }
    let expect = n1 / d1 - n0 / d0;
    let got = tree.predict_effect(&d.samples()[0].features);
    assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
}

#[test]
fn cross_validation_prefers_the_split_on_subgroups() {
    let d = gen_rct::<f64>(&subgroup_dgp(3_000, 6)).unwrap();
    let grid = ParamGrid {
        max_depth: vec![0, 1, 3],
        min_leaf: vec![20, 2_000],
    };
    let (best, scores) =
        cross_validate(&d, TunedMethod::CausalTree, &params(5, 5), &grid, 3, 1).unwrap();
    assert_eq!(scores.len(), 6);
    // min_leaf 2000 per arm cannot be met in a 2000-row training fold
    let fitted: Vec<_> = scores.iter().filter(|s| s.mean_loss.is_some()).collect();
    assert!(!fitted.is_empty());
    let argmin = fitted
        .iter()
        .min_by(|a, b| a.mean_loss.unwrap().total_cmp(&b.mean_loss.unwrap()))
        .unwrap();
    assert_eq!(
        (best.max_depth, best.min_leaf),
        (argmin.max_depth, argmin.min_leaf)
    );
    assert!(best.max_depth >= 1);
    let again = cross_validate(&d, TunedMethod::CausalTree, &params(5, 5), &grid, 3, 1).unwrap();
    assert_eq!(again.1, scores);
}

/// Squared error of the transformed outcome around each leaf's own mean of
/// it, the quantity splits reduce. Leaf predictions are arm-mean
/// differences, which need not be monotone in depth.
fn transformed_sse(d: &Dataset<f64>, m: &CausalTree<f64>) -> f64 {
    let mut leaves: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in d.samples() {
        let y = transformed_outcome(s.outcome, s.treatment, s.propensity.unwrap()).unwrap();
        leaves
            .entry(m.tree().leaf_index(&s.features))
            .or_default()
            .push(y);
    }
    leaves.values().map(|ys| sse(ys)).sum()
}

fn depth_sse_is_monotone(seed: u64, min_leaf: usize) -> Result<(), String> {
    let mut c = DgpConfig::rct(600, vec![1.0, 0.0, -0.5], vec![0.7, -0.4, 0.0], seed);
    c.outcome_noise_sd = 1.0;
    let d = gen_rct::<f64>(&c).unwrap();
    let mut last = f64::INFINITY;
    for depth in 0..5 {
        let t = fit_causal_tree(&d, &params(depth, min_leaf)).unwrap();
        let v = transformed_sse(&d, &t);
        if v > last + 1e-9 * last.abs().max(1.0) {
            return Err(format!("depth {depth}: {v} > {last}"));
        }
        last = v;
    }
    Ok(())
}

#[test]
fn depth_monotone_where_predictions_are_not() {
    // here the leaf predictions fit Y* worse at depth 4 than at depth 3
    depth_sse_is_monotone(18377454269785924812, 36).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn deeper_causal_trees_never_fit_worse(seed in any::<u64>(), min_leaf in 5usize..40) {
        if let Err(e) = depth_sse_is_monotone(seed, min_leaf) {
            prop_assert!(false, "{}", e);
        }
    }

    #[test]
    fn same_leaf_same_prediction(seed in any::<u64>()) {
        let mut c = DgpConfig::rct(500, vec![1.0, 0.3], vec![0.7, -0.4], seed);
        c.outcome_noise_sd = 0.5;
        let d = gen_rct::<f64>(&c).unwrap();
        let t = fit_causal_tree(&d, &params(3, 10)).unwrap();
        let leaves: Vec<(usize, f64)> = d
            .samples()
            .iter()
            .map(|s| (t.tree().leaf_index(&s.features), t.predict_effect(&s.features)))
            .collect();
        for a in &leaves {
            for b in &leaves {
                if a.0 == b.0 {
                    prop_assert_eq!(a.1, b.1);
                }
            }
        }
    }
}
