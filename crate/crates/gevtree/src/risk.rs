//! Risk-sensitive scheduling quantities built on predicted conditional GEV
//! densities: LOLP-driven capacity, daily EUE, and annual aggregation.

use std::io::Write;
use std::path::Path;

use chrono::{DateTime, NaiveDate, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::ensemble::{EnsembleError, EnsembleModel};
use crate::gev::{GevError, GevParams};

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("day {0} has {1} hourly records, expected 24")]
    IncompleteDay(NaiveDate, usize),
    #[error("loss-of-load probability must lie in (0, 1), got {0}")]
    InvalidPolicy(f64),
    #[error(transparent)]
    Gev(#[from] GevError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// The NERC "one day in ten years" guideline expressed per day:
/// η = 0.1/365 events/day.
pub fn nerc_daily_lolp() -> f64 {
    0.1 / 365.0
}

/// Daily loss-of-load probability budget η and its confidence α = 1 − η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskPolicy {
    pub daily_lolp: f64,
}

impl RiskPolicy {
    pub fn new(daily_lolp: f64) -> Result<Self, RiskError> {
        if !(daily_lolp > 0.0 && daily_lolp < 1.0) {
            return Err(RiskError::InvalidPolicy(daily_lolp));
        }
        Ok(RiskPolicy { daily_lolp })
    }

    pub fn nerc() -> Self {
        RiskPolicy { daily_lolp: nerc_daily_lolp() }
    }

    pub fn confidence(&self) -> f64 {
        1.0 - self.daily_lolp
    }
}

/// Minimal capacity holding the exceedance probability at or below η:
/// the VaR at α = 1 − η (the scheduling bound taken at equality).
pub fn capacity_requirement(params: &GevParams, policy: &RiskPolicy) -> Result<f64, GevError> {
    params.var(policy.confidence())
}

/// Daily expected unserved energy (1−α)·Σₙ (CVaRₙ(α) − VaRₙ(α)) over the
/// supplied hourly parameter estimates.
pub fn daily_eue(hourly_params: &[GevParams], policy: &RiskPolicy) -> Result<f64, GevError> {
    let alpha = policy.confidence();
    let mut sum = 0.0;
    for p in hourly_params {
        sum += p.cvar(alpha)? - p.var(alpha)?;
    }
    Ok((1.0 - alpha) * sum)
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskRecord {
    pub instant: DateTime<Utc>,
    pub params: GevParams,
    pub var: f64,
    pub cvar: f64,
    pub capacity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DailyEue {
    pub date: NaiveDate,
    pub eue: f64,
}

/// Per-interval records plus daily and annual aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub records: Vec<RiskRecord>,
    pub daily_eue: Vec<DailyEue>,
    pub annual_eue: f64,
    pub annual_capacity_sum: f64,
}

/// Evaluate the risk pipeline over hourly covariates grouped into complete
/// UTC calendar days. Partial days are rejected rather than prorated.
pub fn annual_report(
    model: &EnsembleModel,
    xs: &[Vec<f64>],
    instants: &[DateTime<Utc>],
    policy: &RiskPolicy,
) -> Result<RiskReport, RiskError> {
    assert_eq!(xs.len(), instants.len(), "covariates and instants must align");
    let alpha = policy.confidence();

    let mut records = Vec::with_capacity(xs.len());
    for (x, &instant) in xs.iter().zip(instants) {
        let params = model.predict(x)?;
        let var = params.var(alpha)?;
        let cvar = params.cvar(alpha)?;
        records.push(RiskRecord { instant, params, var, cvar, capacity: var });
    }

    // Group consecutive records by calendar date; aggregation order is the
    // input order, so day-level results are deterministic.
    let mut daily = Vec::new();
    let mut i = 0;
    while i < records.len() {
        let date = records[i].instant.date_naive();
        let mut j = i;
        while j < records.len() && records[j].instant.date_naive() == date {
            j += 1;
        }
        if j - i != 24 {
            return Err(RiskError::IncompleteDay(date, j - i));
        }
        let eue = (1.0 - alpha)
            * records[i..j].iter().map(|r| r.cvar - r.var).sum::<f64>();
        daily.push(DailyEue { date, eue });
        i = j;
    }

    let annual_eue = daily.iter().map(|d| d.eue).sum();
    let annual_capacity_sum = records.iter().map(|r| r.capacity).sum();
    Ok(RiskReport { records, daily_eue: daily, annual_eue, annual_capacity_sum })
}

impl RiskReport {
    /// Per-interval CSV: `instant,mu,sigma,xi,var,cvar,capacity`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "instant,mu,sigma,xi,var,cvar,capacity")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.instant.to_rfc3339(),
                r.params.mu,
                r.params.sigma,
                r.params.xi,
                r.var,
                r.cvar,
                r.capacity
            )?;
        }
        Ok(())
    }

    /// JSON summary with the daily EUE series and the annual aggregates.
    pub fn write_summary_json(&self, path: &Path) -> Result<(), RiskError> {
        #[derive(Serialize)]
        struct Summary<'a> {
            daily_eue: &'a [DailyEue],
            annual_eue: f64,
            annual_capacity_sum: f64,
        }
        let summary = Summary {
            daily_eue: &self.daily_eue,
            annual_eue: self.annual_eue,
            annual_capacity_sum: self.annual_capacity_sum,
        };
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, &summary)
            .map_err(std::io::Error::other)?;
        file.write_all(b"\n")?;
        Ok(())
    }
}
