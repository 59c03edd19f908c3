//! Bootstrap-aggregating ensemble of extreme trees with parameter-space
//! averaging at inference.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::gev::GevParams;
use crate::tree::{fit_tree, predict_tree, TreeConfig, TreeError, TreeNode};

const MEMBER_FIT_RETRIES: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("resample ratio must be positive, got {0}")]
    InvalidRatio(f64),
    #[error("ensemble must have at least one member")]
    NoMembers,
    #[error("member {member} failed to fit after {retries} seed retries: {cause}")]
    MemberFitFailure { member: usize, retries: usize, cause: String },
    #[error("covariate has {got} dimensions, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub k_members: usize,
    pub resample_ratio: f64,
    pub seed: u64,
    pub tree_config: TreeConfig,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            k_members: 50,
            resample_ratio: 1.0,
            seed: 0,
            tree_config: TreeConfig::default(),
        }
    }
}

/// K fitted trees plus the configuration that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub members: Vec<TreeNode>,
    pub config: EnsembleConfig,
    pub covariate_schema: Vec<String>,
}

/// ⌈ratio·N⌉ covariate–target pairs drawn uniformly with replacement.
/// Ratios above 1 produce subsets larger than the parent.
pub fn bootstrap_sample(
    data: &Dataset,
    ratio: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Dataset, EnsembleError> {
    if data.n_rows() == 0 {
        return Err(EnsembleError::EmptyDataset);
    }
    if !(ratio > 0.0) {
        return Err(EnsembleError::InvalidRatio(ratio));
    }
    let n = data.n_rows();
    let size = (ratio * n as f64).ceil() as usize;
    let indices: Vec<usize> = (0..size).map(|_| rng.gen_range(0..n)).collect();
    Ok(data.subset(&indices))
}

/// Deterministic per-member generator: one ChaCha stream per
/// (member, attempt) pair so parallel fitting is order-independent.
fn member_rng(seed: u64, member: usize, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member as u64 * (MEMBER_FIT_RETRIES as u64 + 1) + attempt as u64);
    rng
}

/// Fit K trees on independent bootstrap samples. A member whose root is
/// unfittable is retried with a fresh derived seed up to 5 times.
pub fn fit_ensemble(data: &Dataset, config: &EnsembleConfig) -> Result<EnsembleModel, EnsembleError> {
    if data.n_rows() == 0 {
        return Err(EnsembleError::EmptyDataset);
    }
    if config.k_members == 0 {
        return Err(EnsembleError::NoMembers);
    }
    if !(config.resample_ratio > 0.0) {
        return Err(EnsembleError::InvalidRatio(config.resample_ratio));
    }
    config.tree_config.validate()?;

    let members: Result<Vec<TreeNode>, EnsembleError> = (0..config.k_members)
        .into_par_iter()
        .map(|member| {
            let mut last_err = String::new();
            for attempt in 0..=MEMBER_FIT_RETRIES {
                let mut rng = member_rng(config.seed, member, attempt);
                let subset = bootstrap_sample(data, config.resample_ratio, &mut rng)?;
                match fit_tree(&subset, &config.tree_config) {
                    Ok(tree) => return Ok(tree),
                    Err(TreeError::RootUnfittable(cause)) => last_err = cause,
                    Err(other) => return Err(other.into()),
                }
            }
            Err(EnsembleError::MemberFitFailure {
                member,
                retries: MEMBER_FIT_RETRIES,
                cause: last_err,
            })
        })
        .collect();

    Ok(EnsembleModel {
        members: members?,
        config: config.clone(),
        covariate_schema: data.column_names().to_vec(),
    })
}

impl EnsembleModel {
    /// Component-wise arithmetic mean of the member parameter estimates.
    pub fn predict(&self, x: &[f64]) -> Result<GevParams, EnsembleError> {
        if x.len() != self.covariate_schema.len() {
            return Err(EnsembleError::DimensionMismatch {
                expected: self.covariate_schema.len(),
                got: x.len(),
            });
        }
        let k = self.members.len() as f64;
        let (mut mu, mut sigma, mut xi) = (0.0, 0.0, 0.0);
        for member in &self.members {
            let p = predict_tree(member, x)?;
            mu += p.mu;
            sigma += p.sigma;
            xi += p.xi;
        }
        Ok(GevParams { mu: mu / k, sigma: sigma / k, xi: xi / k })
    }

    /// Row-wise [`Self::predict`], order preserved.
    pub fn predict_series(&self, xs: &[Vec<f64>]) -> Result<Vec<GevParams>, EnsembleError> {
        xs.iter().map(|row| self.predict(row)).collect()
    }
}
