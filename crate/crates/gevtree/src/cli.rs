//! Command-line surface binding the library into reproducible workflows.
//!
//! Every command is a pure function of (input files, flags, seed): re-runs
//! produce byte-identical outputs. Each run emits its resolved
//! configuration next to the outputs as `run_config.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{
    self, load_covariates_csv, load_observations_csv, load_training_csv, BlockMode, BlockSpec,
    DataError,
};
use crate::ensemble::{fit_ensemble, EnsembleConfig, EnsembleError};
use crate::risk::{annual_report, nerc_daily_lolp, RiskError, RiskPolicy};
use crate::synth::{self, SyntheticSpec, LPHC_QUANTILES};
use crate::tree::{TreeConfig, TreeError};

#[derive(Parser)]
#[command(name = "gevtree", version, about = "Conditional GEV tree ensembles and risk metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a bagged GEV tree ensemble on a training CSV and persist it.
    Fit {
        /// Training CSV with header `block_start,<covariates...>,peak`.
        train: PathBuf,
        #[command(flatten)]
        fit: FitFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Predict conditional GEV parameters (and optional quantiles) per row.
    Predict {
        model: PathBuf,
        /// Covariate CSV with header `timestamp,<covariates...>`.
        covariates: PathBuf,
        /// Comma-separated quantile levels to append as columns.
        #[arg(long, value_delimiter = ',')]
        quantiles: Vec<f64>,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Compute the VaR/CVaR/capacity/EUE risk report over complete days.
    Risk {
        model: PathBuf,
        /// Hourly covariate CSV with header `timestamp,<covariates...>`.
        covariates: PathBuf,
        /// Daily loss-of-load probability budget η (default: NERC 0.1/365).
        #[arg(long)]
        lolp: Option<f64>,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Run the synthetic benchmark end-to-end: generate, fit, evaluate.
    Synth {
        /// Training sample size.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Quantile levels scored on the evaluation grid.
        #[arg(long, value_delimiter = ',')]
        quantiles: Vec<f64>,
        #[command(flatten)]
        fit: FitFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Extract block extrema from a high-resolution observation CSV.
    Blocks {
        /// Observation CSV with header `timestamp,value`.
        observations: PathBuf,
        /// Block length.
        #[arg(long, value_enum, default_value_t = BlockLength::Daily)]
        block: BlockLength,
        /// Extremum taken within each block.
        #[arg(long, value_enum, default_value_t = ModeFlag::Max)]
        mode: ModeFlag,
        /// Blocks with fewer observations are dropped (reported on stderr).
        #[arg(long, default_value_t = 12)]
        min_observations: usize,
        #[command(flatten)]
        out: OutFlags,
    },
}

/// Ensemble/tree flags shadowing the config field names one-to-one.
/// Defaults are the case-study values (K=50, ρ=1, t_crit=0.05, min 30).
#[derive(Args, Serialize)]
struct FitFlags {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of ensemble members K.
    #[arg(long, default_value_t = 50)]
    members: usize,
    /// Bootstrap resample ratio ρ.
    #[arg(long, default_value_t = 1.0)]
    resample_ratio: f64,
    /// Impurity-drop acceptance threshold.
    #[arg(long, default_value_t = 0.05)]
    t_crit: f64,
    /// Minimum partition size per leaf.
    #[arg(long, default_value_t = 30)]
    min_partition: usize,
    /// Maximum best-first growing iterations per tree.
    #[arg(long, default_value_t = 40)]
    max_iters: usize,
}

impl FitFlags {
    fn to_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            k_members: self.members,
            resample_ratio: self.resample_ratio,
            seed: self.seed,
            tree_config: TreeConfig {
                min_partition_size: self.min_partition,
                t_crit: self.t_crit,
                max_grow_iterations: self.max_iters,
            },
        }
    }
}

#[derive(Args)]
struct OutFlags {
    /// Directory receiving the output artifacts and the run manifest.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum BlockLength {
    Daily,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeFlag {
    Max,
    Min,
}

/// Error partitioned by exit code: 2 for user/input problems, 1 for
/// internal failures.
enum AppError {
    User(String),
    Internal(String),
}

impl AppError {
    fn exit_code(&self) -> ExitCode {
        match self {
            AppError::User(_) => ExitCode::from(2),
            AppError::Internal(_) => ExitCode::from(1),
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::User(m) | AppError::Internal(m) => m,
        }
    }
}

impl From<DataError> for AppError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io(_) => AppError::Internal(e.to_string()),
            _ => AppError::User(e.to_string()),
        }
    }
}

impl From<EnsembleError> for AppError {
    fn from(e: EnsembleError) -> Self {
        match e {
            EnsembleError::MemberFitFailure { .. } => AppError::Internal(e.to_string()),
            EnsembleError::Tree(TreeError::RootUnfittable(_)) => AppError::User(e.to_string()),
            EnsembleError::Tree(_) => AppError::Internal(e.to_string()),
            _ => AppError::User(e.to_string()),
        }
    }
}

impl From<RiskError> for AppError {
    fn from(e: RiskError) -> Self {
        match e {
            RiskError::IncompleteDay(..) | RiskError::InvalidPolicy(_) => {
                AppError::User(e.to_string())
            }
            RiskError::Ensemble(inner) => inner.into(),
            RiskError::Io(_) | RiskError::Gev(_) => AppError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Internal(format!("io error: {e}"))
    }
}

fn write_manifest<T: Serialize>(out_dir: &Path, manifest: &T) -> Result<(), AppError> {
    let mut file = BufWriter::new(File::create(out_dir.join("run_config.json"))?);
    serde_json::to_writer_pretty(&mut file, manifest)
        .map_err(|e| AppError::Internal(e.to_string()))?;
    file.write_all(b"\n")?;
    file.flush()?;
    Ok(())
}

fn ensure_out_dir(out: &OutFlags) -> Result<(), AppError> {
    std::fs::create_dir_all(&out.out_dir)
        .map_err(|e| AppError::User(format!("cannot create output directory: {e}")))?;
    Ok(())
}

fn cmd_fit(train: &Path, fit: &FitFlags, out: &OutFlags) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let training = load_training_csv(train)?;
    let config = fit.to_config();
    let model = fit_ensemble(&training.dataset, &config)?;
    let model_path = out.out_dir.join("model.json");
    data::save_model(&model, &model_path)?;

    #[derive(Serialize)]
    struct Manifest<'a> {
        command: &'static str,
        train: String,
        model: String,
        #[serde(flatten)]
        config: &'a EnsembleConfig,
    }
    write_manifest(
        &out.out_dir,
        &Manifest {
            command: "fit",
            train: train.display().to_string(),
            model: model_path.display().to_string(),
            config: &config,
        },
    )
}

fn cmd_predict(
    model_path: &Path,
    covariates: &Path,
    quantiles: &[f64],
    out: &OutFlags,
) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    if let Some(&q) = quantiles.iter().find(|q| !(0.0 < **q && **q < 1.0)) {
        return Err(AppError::User(format!("quantile level must lie in (0, 1), got {q}")));
    }
    let model = data::load_model(model_path)?;
    let cov = load_covariates_csv(covariates)?;
    if cov.column_names != model.covariate_schema {
        return Err(AppError::User(format!(
            "covariate columns {:?} do not match model schema {:?}",
            cov.column_names, model.covariate_schema
        )));
    }

    let mut file = BufWriter::new(File::create(out.out_dir.join("params.csv"))?);
    write!(file, "timestamp,mu,sigma,xi")?;
    for q in quantiles {
        write!(file, ",q{q}")?;
    }
    writeln!(file)?;
    for (t, row) in cov.timestamps.iter().zip(&cov.rows) {
        let p = model.predict(row)?;
        write!(file, "{},{},{},{}", t.to_rfc3339(), p.mu, p.sigma, p.xi)?;
        for &q in quantiles {
            let v = p
                .inverse_cdf(q)
                .map_err(|e| AppError::Internal(e.to_string()))?;
            write!(file, ",{v}")?;
        }
        writeln!(file)?;
    }
    file.flush()?;

    #[derive(Serialize)]
    struct Manifest<'a> {
        command: &'static str,
        model: String,
        covariates: String,
        quantiles: &'a [f64],
    }
    write_manifest(
        &out.out_dir,
        &Manifest {
            command: "predict",
            model: model_path.display().to_string(),
            covariates: covariates.display().to_string(),
            quantiles,
        },
    )
}

fn cmd_risk(
    model_path: &Path,
    covariates: &Path,
    lolp: Option<f64>,
    out: &OutFlags,
) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let policy = match lolp {
        Some(eta) => RiskPolicy::new(eta)?,
        None => RiskPolicy::nerc(),
    };
    let model = data::load_model(model_path)?;
    let cov = load_covariates_csv(covariates)?;
    if cov.column_names != model.covariate_schema {
        return Err(AppError::User(format!(
            "covariate columns {:?} do not match model schema {:?}",
            cov.column_names, model.covariate_schema
        )));
    }
    let report = annual_report(&model, &cov.rows, &cov.timestamps, &policy)?;
    let mut csv = BufWriter::new(File::create(out.out_dir.join("risk.csv"))?);
    report.write_csv(&mut csv).map_err(AppError::from)?;
    csv.flush()?;
    report.write_summary_json(&out.out_dir.join("risk_summary.json"))?;

    #[derive(Serialize)]
    struct Manifest {
        command: &'static str,
        model: String,
        covariates: String,
        lolp: f64,
        alpha: f64,
    }
    write_manifest(
        &out.out_dir,
        &Manifest {
            command: "risk",
            model: model_path.display().to_string(),
            covariates: covariates.display().to_string(),
            lolp: policy.daily_lolp,
            alpha: policy.confidence(),
        },
    )
}

fn cmd_synth(n: usize, quantiles: &[f64], fit: &FitFlags, out: &OutFlags) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let quantiles: Vec<f64> = if quantiles.is_empty() {
        LPHC_QUANTILES.to_vec()
    } else {
        quantiles.to_vec()
    };
    if let Some(&q) = quantiles.iter().find(|q| !(0.0 < **q && **q < 1.0)) {
        return Err(AppError::User(format!("quantile level must lie in (0, 1), got {q}")));
    }
    let spec = SyntheticSpec { n, seed: fit.seed, ..SyntheticSpec::default() };
    let config = fit.to_config();
    let data = synth::generate(&spec);
    let model = fit_ensemble(&data, &config)?;
    let table = synth::evaluate(&model, &spec, &quantiles)?;

    let mut csv = BufWriter::new(File::create(out.out_dir.join("synth_eval.csv"))?);
    table.write_eval_csv(&mut csv)?;
    csv.flush()?;
    table.write_scores_json(&out.out_dir.join("synth_scores.json"))?;

    #[derive(Serialize)]
    struct Manifest<'a> {
        command: &'static str,
        n: usize,
        quantiles: &'a [f64],
        mean_crps: f64,
        #[serde(flatten)]
        config: &'a EnsembleConfig,
    }
    write_manifest(
        &out.out_dir,
        &Manifest {
            command: "synth",
            n,
            quantiles: &quantiles,
            mean_crps: table.mean_crps,
            config: &config,
        },
    )
}

fn cmd_blocks(
    observations: &Path,
    block: BlockLength,
    mode: ModeFlag,
    min_observations: usize,
    out: &OutFlags,
) -> Result<(), AppError> {
    ensure_out_dir(out)?;
    let series = load_observations_csv(observations)?;
    let spec = BlockSpec {
        min_observations,
        ..BlockSpec::daily(match mode {
            ModeFlag::Max => BlockMode::Max,
            ModeFlag::Min => BlockMode::Min,
        })
    };
    let extrema = data::extract_block_extrema(&series, &spec)?;
    for (start, count) in &extrema.dropped {
        eprintln!(
            "dropped block starting {} with {count} observations (minimum {min_observations})",
            start.to_rfc3339()
        );
    }

    let mut file = BufWriter::new(File::create(out.out_dir.join("extrema.csv"))?);
    writeln!(file, "block_start,value")?;
    for (start, value) in extrema.starts.iter().zip(&extrema.values) {
        writeln!(file, "{},{value}", start.to_rfc3339())?;
    }
    file.flush()?;

    #[derive(Serialize)]
    struct Manifest {
        command: &'static str,
        observations: String,
        block: BlockLength,
        mode: ModeFlag,
        min_observations: usize,
        blocks_kept: usize,
        blocks_dropped: usize,
    }
    write_manifest(
        &out.out_dir,
        &Manifest {
            command: "blocks",
            observations: observations.display().to_string(),
            block,
            mode,
            min_observations,
            blocks_kept: extrema.values.len(),
            blocks_dropped: extrema.dropped.len(),
        },
    )
}

/// Parse arguments, dispatch, and translate failures to the exit-code
/// contract: 0 success, 1 internal error, 2 user/input error.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit { train, fit, out } => cmd_fit(train, fit, out),
        Command::Predict { model, covariates, quantiles, out } => {
            cmd_predict(model, covariates, quantiles, out)
        }
        Command::Risk { model, covariates, lolp, out } => {
            cmd_risk(model, covariates, *lolp, out)
        }
        Command::Synth { n, quantiles, fit, out } => cmd_synth(*n, quantiles, fit, out),
        Command::Blocks { observations, block, mode, min_observations, out } => {
            cmd_blocks(observations, *block, *mode, *min_observations, out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.exit_code()
        }
    }
}

/// Default η when `--lolp` is absent (re-exported for tests).
pub fn default_lolp() -> f64 {
    nerc_daily_lolp()
}
