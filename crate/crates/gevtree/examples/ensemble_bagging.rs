//! Bagged ensemble of GEV trees: bootstrap resampling smooths the hard
//! partition boundaries of a single tree into gradual parameter
//! transitions.
//!
//! ```sh
//! cargo run --example ensemble_bagging
//! ```

use gevtree::ensemble::{fit_ensemble, EnsembleConfig};
use gevtree::synth::{generate, true_params, SyntheticSpec};
use gevtree::tree::TreeConfig;

fn main() {
    let spec = SyntheticSpec { n: 1000, seed: 1, ..SyntheticSpec::default() };
    let data = generate(&spec);

    let config = EnsembleConfig {
        k_members: 25,
        resample_ratio: 1.0,
        seed: 1,
        tree_config: TreeConfig { min_partition_size: 20, t_crit: 1e-4, max_grow_iterations: 40 },
    };
    let model = fit_ensemble(&data, &config).expect("ensemble fits");

    let leaves: usize = model.members.iter().map(|t| t.leaf_count()).sum();
    println!(
        "{} members, {:.1} leaves on average\n",
        model.members.len(),
        leaves as f64 / model.members.len() as f64
    );

    // Predictions average member parameters component-wise, so the curve
    // below varies smoothly in x even though each member is piecewise
    // constant.
    println!("{:>6}  {:>18}  {:>18}", "x", "true (mu,sig,xi)", "estimate");
    for g in 0..11 {
        let x = std::f64::consts::PI * g as f64 / 10.0;
        let truth = true_params(x).unwrap();
        let est = model.predict(&[x]).unwrap();
        println!(
            "{x:>6.3}  {:>5.2} {:>5.2} {:>5.2}  {:>6.2} {:>5.2} {:>5.2}",
            truth.mu, truth.sigma, truth.xi, est.mu, est.sigma, est.xi
        );
    }
}
