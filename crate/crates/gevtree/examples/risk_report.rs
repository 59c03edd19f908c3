//! Reserve-capacity planning from a fitted model: per-hour value at risk
//! at the NERC one-day-in-ten-years criterion, grouped into daily
//! expected-unserved-energy totals.
//!
//! ```sh
//! cargo run --example risk_report
//! ```

use chrono::{Duration, TimeZone, Utc};
use gevtree::data::Dataset;
use gevtree::ensemble::{fit_ensemble, EnsembleConfig};
use gevtree::gev::GevParams;
use gevtree::risk::{annual_report, nerc_daily_lolp, RiskPolicy};
use gevtree::tree::TreeConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    // Train on two demand regimes keyed by a single covariate.
    let low = GevParams::new(10.0, 1.0, 0.05).unwrap();
    let high = GevParams::new(20.0, 2.0, 0.10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 800;
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for i in 0..n {
        let regime = (i % 2) as f64;
        rows.push(vec![regime]);
        targets.push(if regime == 0.0 { low.sample(&mut rng) } else { high.sample(&mut rng) });
    }
    let data = Dataset::new(rows, targets, vec!["regime".into()]).unwrap();
    let config = EnsembleConfig {
        k_members: 20,
        seed: 3,
        tree_config: TreeConfig { min_partition_size: 100, ..TreeConfig::default() },
        ..EnsembleConfig::default()
    };
    let model = fit_ensemble(&data, &config).expect("ensemble fits");

    // One week of hourly covariates, alternating regimes by day. Days
    // must be complete — partial days are an error, not prorated.
    let start = Utc.with_ymd_and_hms(2024, 7, 1, 0, 0, 0).unwrap();
    let mut instants = Vec::new();
    let mut xs = Vec::new();
    for hour in 0..(7 * 24) {
        instants.push(start + Duration::hours(hour));
        xs.push(vec![((hour / 24) % 2) as f64]);
    }

    let policy = RiskPolicy::nerc();
    println!(
        "policy: daily LOLP = {:.3e} (1 day in 10 years), confidence = {:.10}",
        nerc_daily_lolp(),
        policy.confidence()
    );

    let report = annual_report(&model, &xs, &instants, &policy).expect("complete days");

    println!("\n{:>12}  {:>12}", "date", "daily EUE");
    for day in &report.daily_eue {
        println!("{:>12}  {:>12.6}", day.date, day.eue);
    }
    println!("\ntotal EUE           {:12.6}", report.annual_eue);
    println!("capacity sum        {:12.1}", report.annual_capacity_sum);

    let first = &report.records[0];
    println!(
        "\nfirst hour: capacity = VaR = {:.3}, CVaR = {:.3}",
        first.capacity, first.cvar
    );
}
