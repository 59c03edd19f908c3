//! Distributional validation of the synthetic benchmark generator.

mod common;

use common::{ks_p_value, ks_uniform_statistic};
use gevtree::synth::{generate, true_params, SyntheticSpec};

#[test]
fn generator_matches_the_true_law_per_bin() {
    // Probability integral transform: F(y | x) must be uniform. Check a
    // KS test per covariate bin so local parameter errors cannot hide in
    // the aggregate.
    let spec = SyntheticSpec { n: 20_000, seed: 17, ..SyntheticSpec::default() };
    let data = generate(&spec);
    let bins = 10;
    let mut pits: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for i in 0..data.n_rows() {
        let x = data.row(i)[0];
        let bin = ((x / std::f64::consts::PI * bins as f64) as usize).min(bins - 1);
        let truth = true_params(x).unwrap();
        pits[bin].push(truth.cdf(data.target(i)));
    }
    let mut passing = 0;
    for (bin, pit) in pits.iter_mut().enumerate() {
        assert!(pit.len() > 1000, "bin {bin} unexpectedly sparse");
        let d = ks_uniform_statistic(pit);
        let p = ks_p_value(d, pit.len());
        if p > 0.01 {
            passing += 1;
        }
    }
    assert!(passing >= 9, "only {passing}/{bins} bins pass the KS test");
}

#[test]
fn evaluation_sample_is_independent_of_training() {
    let spec = SyntheticSpec { n: 500, seed: 23, ..SyntheticSpec::default() };
    let train = generate(&spec);
    let eval = gevtree::synth::generate_evaluation(&spec);
    assert_eq!(train.n_rows(), eval.n_rows());
    let overlap = (0..train.n_rows())
        .filter(|&i| train.row(i)[0] == eval.row(i)[0])
        .count();
    assert_eq!(overlap, 0, "streams must not repeat covariates position-wise");
}
