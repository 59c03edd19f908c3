//! Probability-weighted-moments estimation of GEV parameters from a sample
//! of block maxima. Closed form, no iteration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gev::{GevParams, EPS_XI};
use crate::special::{gamma, EULER_MASCHERONI};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PwmError {
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample contains non-finite values")]
    NonFiniteSample,
    #[error("degenerate sample: 3*b2 - b0 = 0 (all values equal)")]
    DegenerateSample,
    #[error("estimated scale {0} is not positive")]
    InvalidScale(f64),
    #[error("estimated shape {0} admits no valid distribution (requires xi > -1)")]
    ShapeOutOfRange(f64),
}

/// Probability-weighted moments of an ascending-ordered sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwmMoments {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    pub n: usize,
}

/// Moments b0, b1, b2 and the shape statistic c from an unordered sample.
pub fn compute_moments(sample: &[f64]) -> Result<PwmMoments, PwmError> {
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(PwmError::NonFiniteSample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    moments_of_sorted(&sorted)
}

/// Same as [`compute_moments`] for a sample already sorted ascending.
pub(crate) fn moments_of_sorted(sorted: &[f64]) -> Result<PwmMoments, PwmError> {
    let n = sorted.len();
    if n < 3 {
        return Err(PwmError::TooFewSamples(n));
    }
    let nf = n as f64;
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (j, &y) in sorted.iter().enumerate() {
        let r = j as f64; // rank index j-1 for 1-based j
        b0 += y;
        b1 += r / (nf - 1.0) * y;
        b2 += r * (r - 1.0) / ((nf - 1.0) * (nf - 2.0)) * y;
    }
    b0 /= nf;
    b1 /= nf;
    b2 /= nf;
    let denom = 3.0 * b2 - b0;
    if denom == 0.0 {
        return Err(PwmError::DegenerateSample);
    }
    let c = (2.0 * b1 - b0) / denom - std::f64::consts::LN_2 / 3f64.ln();
    Ok(PwmMoments { b0, b1, b2, c, n })
}

/// Closed-form PWM estimate of the GEV parameters.
pub fn estimate(sample: &[f64]) -> Result<GevParams, PwmError> {
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(PwmError::NonFiniteSample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    estimate_sorted(&sorted)
}

/// [`estimate`] for a sample already sorted ascending (hot path of the
/// split search).
pub(crate) fn estimate_sorted(sorted: &[f64]) -> Result<GevParams, PwmError> {
    let m = moments_of_sorted(sorted)?;
    params_from_moments(&m)
}

pub(crate) fn params_from_moments(m: &PwmMoments) -> Result<GevParams, PwmError> {
    let c = m.c;
    let xi = -7.8590 * c - 2.9554 * c * c;
    if xi <= -1.0 {
        return Err(PwmError::ShapeOutOfRange(xi));
    }
    let (sigma, mu) = if xi.abs() <= EPS_XI {
        // Gumbel limit of the closed forms, which are 0/0 at xi = 0.
        let sigma = (2.0 * m.b1 - m.b0) / std::f64::consts::LN_2;
        (sigma, m.b0 - sigma * EULER_MASCHERONI)
    } else {
        let g = gamma(1.0 - xi);
        let sigma = (m.b0 - 2.0 * m.b1) * xi / (g * (1.0 - 2f64.powf(xi)));
        (sigma, m.b0 - sigma / xi * (g - 1.0))
    };
    if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
        return Err(PwmError::InvalidScale(sigma));
    }
    Ok(GevParams { mu, sigma, xi })
}
