//! CSV ingestion and model persistence against on-disk fixtures.

use std::fs;
use std::io::Write;

use gevtree::data::{
    load_covariates_csv, load_model, load_observations_csv, load_training_csv, save_model,
    DataError,
};
use gevtree::data::Dataset;
use gevtree::ensemble::{fit_ensemble, EnsembleConfig};
use gevtree::gev::GevParams;
use gevtree::tree::TreeConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::tempdir;

fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    let mut f = fs::File::create(&path).unwrap();
    f.write_all(content.as_bytes()).unwrap();
    path
}

#[test]
fn observations_csv_round_trip() {
    let dir = tempdir().unwrap();
    let path = write_file(
        &dir,
        "obs.csv",
        "timestamp,value\n\
         2024-01-01T00:00:00Z,10.5\n\
         2024-01-01T01:00:00Z,11.25\n\
         2024-01-01T02:00:00Z,9.0\n",
    );
    let series = load_observations_csv(&path).unwrap();
    assert_eq!(series.len(), 3);
    assert_eq!(series.values, vec![10.5, 11.25, 9.0]);
}

#[test]
fn observations_csv_schema_and_parse_errors() {
    let dir = tempdir().unwrap();
    let bad_header = write_file(&dir, "bad.csv", "time,value\n2024-01-01T00:00:00Z,1\n");
    assert!(matches!(
        load_observations_csv(&bad_header),
        Err(DataError::SchemaMismatch(_))
    ));

    let nan_cell = write_file(
        &dir,
        "nan.csv",
        "timestamp,value\n2024-01-01T00:00:00Z,1.0\n2024-01-01T01:00:00Z,NaN\n",
    );
    match load_observations_csv(&nan_cell) {
        Err(DataError::ParseError { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected ParseError, got {other:?}"),
    }

    assert!(matches!(
        load_observations_csv(dir.path().join("missing.csv").as_path()),
        Err(DataError::FileNotFound(_))
    ));
}

#[test]
fn training_csv_parses_covariates_and_peaks() {
    let dir = tempdir().unwrap();
    let path = write_file(
        &dir,
        "train.csv",
        "block_start,temp,wind,peak\n\
         2024-01-01T00:00:00Z,21.0,3.5,100.0\n\
         2024-01-02T00:00:00Z,25.5,1.0,140.0\n\
         2024-01-03T00:00:00Z,18.0,6.0,90.0\n",
    );
    let data = load_training_csv(&path).unwrap();
    assert_eq!(data.dataset.n_rows(), 3);
    assert_eq!(data.dataset.column_names(), ["temp", "wind"]);
    assert_eq!(data.dataset.target(1), 140.0);
    assert_eq!(data.dataset.row(2), &[18.0, 6.0]);
}

#[test]
fn covariates_csv_parses_rows() {
    let dir = tempdir().unwrap();
    let path = write_file(
        &dir,
        "cov.csv",
        "timestamp,temp\n2024-06-01T00:00:00Z,30.0\n2024-06-01T01:00:00Z,29.5\n",
    );
    let cov = load_covariates_csv(&path).unwrap();
    assert_eq!(cov.rows.len(), 2);
    assert_eq!(cov.column_names, ["temp"]);
}

fn fitted_model() -> gevtree::ensemble::EnsembleModel {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let truth_low = GevParams::new(0.0, 1.0, 0.1).unwrap();
    let truth_high = GevParams::new(4.0, 1.0, 0.1).unwrap();
    let n = 300;
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for _ in 0..n {
        let x: f64 = rng.gen();
        rows.push(vec![x]);
        targets.push(if x < 0.5 {
            truth_low.sample(&mut rng)
        } else {
            truth_high.sample(&mut rng)
        });
    }
    let data = Dataset::new(rows, targets, vec!["x".into()]).unwrap();
    let config = EnsembleConfig {
        k_members: 5,
        seed: 3,
        tree_config: TreeConfig { min_partition_size: 25, ..TreeConfig::default() },
        ..EnsembleConfig::default()
    };
    fit_ensemble(&data, &config).unwrap()
}

#[test]
fn model_round_trip_preserves_predictions_exactly() {
    let model = fitted_model();
    let dir = tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let loaded = load_model(&path).unwrap();

    assert_eq!(loaded.covariate_schema, model.covariate_schema);
    assert_eq!(loaded.config, model.config);
    for i in 0..100 {
        let x = [i as f64 / 100.0];
        let a = model.predict(&x).unwrap();
        let b = loaded.predict(&x).unwrap();
        // Bit-identical, not merely close.
        assert_eq!(a.mu.to_bits(), b.mu.to_bits());
        assert_eq!(a.sigma.to_bits(), b.sigma.to_bits());
        assert_eq!(a.xi.to_bits(), b.xi.to_bits());
    }
}

#[test]
fn truncated_model_file_is_corrupt() {
    let model = fitted_model();
    let dir = tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_model(&path), Err(DataError::CorruptModel(_))));
}

#[test]
fn future_version_is_rejected() {
    let model = fitted_model();
    let dir = tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&model, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replacen("\"version\":1", "\"version\":2", 1)).unwrap();
    assert!(matches!(load_model(&path), Err(DataError::VersionMismatch(2))));
}
