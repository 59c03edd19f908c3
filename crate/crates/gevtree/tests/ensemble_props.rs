//! Statistical properties of the bagging ensemble.

use std::collections::HashSet;

use gevtree::data::Dataset;
use gevtree::ensemble::{fit_ensemble, EnsembleConfig};
use gevtree::gev::GevParams;
use gevtree::tree::TreeConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_regime_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let low = GevParams::new(0.0, 1.0, 0.1).unwrap();
    let high = GevParams::new(4.0, 1.2, 0.1).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen();
        rows.push(vec![x]);
        targets.push(if x < 0.5 { low.sample(&mut rng) } else { high.sample(&mut rng) });
    }
    Dataset::new(rows, targets, vec!["x".into()]).unwrap()
}

#[test]
fn bootstrap_distinct_fraction_near_limit() {
    // With ratio 1 the expected distinct fraction is 1 − 1/e ≈ 0.632.
    let n = 1000;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
    let targets: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let data = Dataset::new(rows, targets, vec!["x".into()]).unwrap();

    let mut total = 0.0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = gevtree::ensemble::bootstrap_sample(&data, 1.0, &mut rng).unwrap();
        let distinct: HashSet<u64> = (0..sample.n_rows())
            .map(|i| sample.row(i)[0] as u64)
            .collect();
        total += distinct.len() as f64 / n as f64;
    }
    let mean = total / 100.0;
    let limit = 1.0 - (-1.0f64).exp();
    assert!((mean - limit).abs() < 0.03, "distinct fraction {mean} vs {limit}");
}

#[test]
fn different_seeds_give_different_models() {
    let data = two_regime_dataset(300, 5);
    let config = |seed| EnsembleConfig {
        k_members: 3,
        seed,
        tree_config: TreeConfig { min_partition_size: 25, ..TreeConfig::default() },
        ..EnsembleConfig::default()
    };
    let a = fit_ensemble(&data, &config(1)).unwrap();
    let b = fit_ensemble(&data, &config(2)).unwrap();
    assert_ne!(a.members, b.members);
    // Same seed: identical members regardless of fitting order.
    let c = fit_ensemble(&data, &config(1)).unwrap();
    assert_eq!(a.members, c.members);
}

#[test]
fn bagging_reduces_prediction_variance() {
    // Refit K=1 and K=50 ensembles on independent datasets and compare
    // the across-refit variance of the location prediction at probe
    // points; averaging must help at most probes.
    let probes: Vec<f64> = (0..10).map(|i| 0.05 + 0.1 * i as f64).collect();
    let refits = 20;
    let config = |k, seed| EnsembleConfig {
        k_members: k,
        seed,
        tree_config: TreeConfig {
            min_partition_size: 25,
            t_crit: 0.01,
            max_grow_iterations: 10,
        },
        ..EnsembleConfig::default()
    };

    let variance = |k: usize| -> Vec<f64> {
        let mut preds = vec![Vec::with_capacity(refits); probes.len()];
        for refit in 0..refits {
            let data = two_regime_dataset(400, 900 + refit as u64);
            let model = fit_ensemble(&data, &config(k, refit as u64)).unwrap();
            for (slot, &x) in preds.iter_mut().zip(&probes) {
                slot.push(model.predict(&[x]).unwrap().mu);
            }
        }
        preds
            .iter()
            .map(|v| {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / v.len() as f64
            })
            .collect()
    };

    let single = variance(1);
    let bagged = variance(50);
    let improved = single
        .iter()
        .zip(&bagged)
        .filter(|(s, b)| b < s)
        .count();
    assert!(improved >= 8, "variance reduced at only {improved}/10 probes");
}
