//! Conditional extreme-value estimation: bagged decision trees that
//! partition covariate space by GEV log-score impurity drop and fit GEV
//! parameters per partition via probability-weighted moments, plus the
//! downstream risk metrics (VaR, CVaR, LOLP-driven capacity, EUE) and an
//! application-neutral synthetic benchmark.

pub mod cli;
pub mod data;
pub mod ensemble;
pub mod gev;
pub mod pwm;
pub mod risk;
pub mod special;
pub mod synth;
pub mod tree;

pub use data::{Dataset, TimeSeries};
pub use ensemble::{fit_ensemble, EnsembleConfig, EnsembleModel};
pub use gev::{GevError, GevParams};
pub use pwm::estimate as pwm_estimate;
pub use risk::{nerc_daily_lolp, RiskPolicy, RiskReport};
pub use tree::{fit_tree, predict_tree, TreeConfig, TreeNode};
