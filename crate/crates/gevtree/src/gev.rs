//! Closed-form mathematics of the generalized extreme value distribution:
//! density, distribution, quantile, moments, scoring, sampling, and
//! estimation-theory diagnostics.

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{
    digamma, exp_integral_ei, gamma, log_integral_li, lower_incomplete_gamma, EULER_MASCHERONI,
};

/// Numeric switch selecting the ξ = 0 (Gumbel) branch of every piecewise
/// formula: |ξ| ≤ `eps_xi` is treated as ξ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelThreshold {
    pub eps_xi: f64,
}

impl Default for GumbelThreshold {
    fn default() -> Self {
        GumbelThreshold { eps_xi: 1e-9 }
    }
}

impl GumbelThreshold {
    pub fn is_gumbel(&self, xi: f64) -> bool {
        xi.abs() <= self.eps_xi
    }
}

/// The single threshold governing all ξ = 0 branch switches.
pub const EPS_XI: f64 = 1e-9;

/// Penalty returned by [`GevParams::log_score`] for observations outside the
/// support, keeping score totals finite and comparable during split search.
pub const SUPPORT_PENALTY: f64 = 1e12;

/// Below this |ξ|, Fisher entries are interpolated through the removable
/// singularity at ξ = 0 instead of evaluated directly (the closed forms
/// lose too many digits to cancellation near zero).
const FISHER_XI_SWITCH: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GevError {
    #[error("observation outside the distribution support")]
    SupportViolation,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("probability must lie strictly inside (0, 1), got {0}")]
    Domain(f64),
    #[error("shape {0} outside the asymptotic regularity region (requires xi > -0.5)")]
    Regularity(f64),
    #[error("special function evaluation hit a pole")]
    Numerical,
    #[error("Fisher information matrix is ill-conditioned (condition number > {0:e})")]
    IllConditioned(f64),
    #[error("tail mean diverges for shape {0} (requires xi < 1)")]
    HeavyTail(f64),
}

/// The (location, scale, shape) triple every prediction is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub xi: f64,
}

impl GevParams {
    /// Validating constructor: σ > 0 and all fields finite.
    pub fn new(mu: f64, sigma: f64, xi: f64) -> Result<Self, GevError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(GevError::InvalidParams(format!("sigma must be > 0, got {sigma}")));
        }
        if !mu.is_finite() || !xi.is_finite() {
            return Err(GevError::InvalidParams(format!("mu={mu}, xi={xi} must be finite")));
        }
        Ok(GevParams { mu, sigma, xi })
    }

    fn is_gumbel(&self) -> bool {
        self.xi.abs() <= EPS_XI
    }

    /// τ(y; μ, σ, ξ), the exponent kernel of the GEV density.
    ///
    /// Errors with [`GevError::SupportViolation`] when 1 + ξ(y−μ)/σ ≤ 0.
    pub fn tau(&self, y: f64) -> Result<f64, GevError> {
        let t = (y - self.mu) / self.sigma;
        if self.is_gumbel() {
            Ok((-t).exp())
        } else {
            let omega = 1.0 + self.xi * t;
            if omega <= 0.0 {
                Err(GevError::SupportViolation)
            } else {
                Ok(omega.powf(-1.0 / self.xi))
            }
        }
    }

    /// Probability density (1/σ)·τ^{1+ξ}·e^{−τ}; zero outside the support.
    pub fn pdf(&self, y: f64) -> f64 {
        match self.tau(y) {
            Ok(tau) => tau.powf(1.0 + self.xi) * (-tau).exp() / self.sigma,
            Err(_) => 0.0,
        }
    }

    /// Cumulative distribution F(y) = e^{−τ}, extended with 0 below the
    /// lower support edge (ξ > 0) and 1 above the upper edge (ξ < 0).
    pub fn cdf(&self, y: f64) -> f64 {
        match self.tau(y) {
            Ok(tau) => (-tau).exp(),
            Err(_) => {
                if self.xi > 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Quantile function F^{−1}(α) for α ∈ (0, 1).
    pub fn inverse_cdf(&self, alpha: f64) -> Result<f64, GevError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(GevError::Domain(alpha));
        }
        let s = -alpha.ln();
        if self.is_gumbel() {
            Ok(self.mu - self.sigma * s.ln())
        } else {
            Ok(self.mu + self.sigma / self.xi * (s.powf(-self.xi) - 1.0))
        }
    }

    /// Negative log-likelihood log σ − (1+ξ)·log τ + τ.
    ///
    /// Returns [`SUPPORT_PENALTY`] outside the support so that split-search
    /// score totals stay finite and comparable.
    pub fn log_score(&self, y: f64) -> f64 {
        match self.tau(y) {
            Ok(tau) => self.sigma.ln() - (1.0 + self.xi) * tau.ln() + tau,
            Err(_) => SUPPORT_PENALTY,
        }
    }

    /// Gradient (∂L/∂μ, ∂L/∂σ, ∂L/∂ξ) of the log score.
    ///
    /// The ξ = 0 branch uses the analytic Gumbel limits.
    pub fn gradient(&self, y: f64) -> Result<[f64; 3], GevError> {
        let t = (y - self.mu) / self.sigma;
        if self.is_gumbel() {
            let e = (-t).exp();
            return Ok([
                (e - 1.0) / self.sigma,
                (1.0 - t + t * e) / self.sigma,
                t + 0.5 * t * t * (e - 1.0),
            ]);
        }
        let xi = self.xi;
        let omega = 1.0 + xi * t;
        if omega <= 0.0 {
            return Err(GevError::SupportViolation);
        }
        let nu = omega.powf(-1.0 / xi);
        let d_mu = (nu - 1.0 - xi) / (self.sigma * omega);
        let d_sigma = (1.0 - (1.0 + xi - nu) * t / omega) / self.sigma;
        let d_xi =
            (nu - 1.0) * omega.ln() / (xi * xi) + (1.0 + xi - nu) * (omega - 1.0) / (xi * xi * omega);
        Ok([d_mu, d_sigma, d_xi])
    }

    /// Fisher information matrix I(θ); symmetric positive definite for
    /// ξ > −0.5.
    pub fn fisher_information(&self) -> Result<[[f64; 3]; 3], GevError> {
        if self.xi <= -0.5 {
            return Err(GevError::Regularity(self.xi));
        }
        let mat = if self.xi.abs() < FISHER_XI_SWITCH {
            // Linear interpolation between ±h through the removable
            // singularity; entry error is O(h²).
            let h = FISHER_XI_SWITCH;
            let lo = fisher_closed_form(self.sigma, -h);
            let hi = fisher_closed_form(self.sigma, h);
            let w = (self.xi + h) / (2.0 * h);
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = lo[i][j] + w * (hi[i][j] - lo[i][j]);
                }
            }
            m
        } else {
            fisher_closed_form(self.sigma, self.xi)
        };
        if mat.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GevError::Numerical);
        }
        Ok(mat)
    }

    /// Natural gradient I^{−1}(θ)·∇L, a diagnostic for gradient-based
    /// fitting schemes.
    pub fn natural_gradient(&self, y: f64) -> Result<[f64; 3], GevError> {
        let grad = self.gradient(y)?;
        let info = self.fisher_information()?;
        let inv = invert3(&info).ok_or(GevError::Numerical)?;
        let cond = norm1(&info) * norm1(&inv);
        if !cond.is_finite() || cond > 1e12 {
            return Err(GevError::IllConditioned(1e12));
        }
        Ok(mat_vec(&inv, &grad))
    }

    /// Expectation; +∞ when ξ ≥ 1.
    pub fn mean(&self) -> f64 {
        if self.xi >= 1.0 {
            f64::INFINITY
        } else if self.is_gumbel() {
            self.mu + self.sigma * EULER_MASCHERONI
        } else {
            self.mu + self.sigma / self.xi * (gamma(1.0 - self.xi) - 1.0)
        }
    }

    /// Value-at-risk at confidence α: an alias for [`Self::inverse_cdf`]
    /// kept for the risk vocabulary.
    pub fn var(&self, alpha: f64) -> Result<f64, GevError> {
        self.inverse_cdf(alpha)
    }

    /// Conditional value-at-risk (1/(1−α))·∫_α^1 F^{−1}(u) du in closed form.
    pub fn cvar(&self, alpha: f64) -> Result<f64, GevError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(GevError::Domain(alpha));
        }
        if self.xi >= 1.0 {
            return Err(GevError::HeavyTail(self.xi));
        }
        let eta = 1.0 - alpha;
        if self.is_gumbel() {
            let s = -alpha.ln();
            Ok(self.mu
                + self.sigma / eta * (EULER_MASCHERONI - log_integral_li(alpha) + alpha * s.ln()))
        } else {
            let gl = lower_incomplete_gamma(1.0 - self.xi, -alpha.ln());
            Ok(self.mu + self.sigma / (eta * self.xi) * (gl - eta))
        }
    }

    /// Continuous ranked probability score ∫ (F(t) − 1{t ≥ y})² dt in
    /// closed form; finite only for ξ < 1.
    pub fn crps(&self, y: f64) -> Result<f64, GevError> {
        if self.xi >= 1.0 {
            return Err(GevError::HeavyTail(self.xi));
        }
        let f = self.cdf(y);
        if self.is_gumbel() {
            Ok(self.mu - y + self.sigma * (EULER_MASCHERONI - std::f64::consts::LN_2)
                - 2.0 * self.sigma * exp_integral_ei(f.ln()))
        } else {
            let xi = self.xi;
            // −log F(y) = τ(y); Γ_l(s, ∞) = Γ(s) covers observations
            // outside the support where F is exactly 0 or 1.
            let neg_log_f = if f > 0.0 { -f.ln() } else { f64::INFINITY };
            let gl = if neg_log_f.is_finite() {
                lower_incomplete_gamma(1.0 - xi, neg_log_f)
            } else {
                gamma(1.0 - xi)
            };
            Ok((self.mu - y - self.sigma / xi) * (1.0 - 2.0 * f)
                - self.sigma / xi * (2f64.powf(xi) * gamma(1.0 - xi) - 2.0 * gl))
        }
    }

    /// One inverse-transform sample driven by the supplied generator.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.inverse_cdf(u).expect("Open01 yields u strictly inside (0, 1)")
    }

    /// `n` inverse-transform samples.
    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Fisher information entries for ξ ≠ 0 from the Prescott–Walton closed
/// forms (cross terms oriented to match the score covariance; see the
/// Monte-Carlo identity test).
fn fisher_closed_form(sigma: f64, xi: f64) -> [[f64; 3]; 3] {
    let g_em = EULER_MASCHERONI;
    let p = (1.0 + xi).powi(2) * gamma(1.0 + 2.0 * xi);
    let q = gamma(2.0 + xi) * (digamma(1.0 + xi) + (1.0 + xi) / xi);
    let s2 = sigma * sigma;
    let i_mm = p / s2;
    let i_ms = -(p - gamma(2.0 + xi)) / (s2 * xi);
    let i_mx = -(q - p / xi) / (sigma * xi);
    let i_ss = (1.0 - 2.0 * gamma(2.0 + xi) + p) / (s2 * xi * xi);
    let i_sx = -((1.0 - gamma(2.0 + xi) + p) / xi + 1.0 - g_em - q) / (sigma * xi * xi);
    let i_xx = (std::f64::consts::PI * std::f64::consts::PI / 6.0
        + (1.0 - g_em + 1.0 / xi).powi(2)
        - 2.0 * q / xi
        + p / (xi * xi))
        / (xi * xi);
    [[i_mm, i_ms, i_mx], [i_ms, i_ss, i_sx], [i_mx, i_sx, i_xx]]
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            let (c, d) = ((j + 1) % 3, (j + 2) % 3);
            // Transposed cofactor.
            inv[j][i] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    Some(inv)
}

fn norm1(m: &[[f64; 3]; 3]) -> f64 {
    (0..3)
        .map(|j| (0..3).map(|i| m[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(mu: f64, sigma: f64, xi: f64) -> GevParams {
        GevParams::new(mu, sigma, xi).unwrap()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(GevParams::new(0.0, 0.0, 0.0).is_err());
        assert!(GevParams::new(0.0, -1.0, 0.0).is_err());
        assert!(GevParams::new(f64::NAN, 1.0, 0.0).is_err());
        assert!(GevParams::new(0.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn tau_examples() {
        assert_eq!(p(0.0, 1.0, 0.0).tau(0.0).unwrap(), 1.0);
        assert_eq!(p(3.0, 2.5, 0.4).tau(3.0).unwrap(), 1.0);
        assert!((p(0.0, 1.0, 0.5).tau(2.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(p(0.0, 1.0, 0.5).tau(-3.0), Err(GevError::SupportViolation));
    }

    #[test]
    fn pdf_examples() {
        let e1 = (-1.0f64).exp();
        assert!((p(0.0, 1.0, 0.0).pdf(0.0) - e1).abs() < 1e-15);
        assert!((p(0.0, 2.0, 0.0).pdf(0.0) - e1 / 2.0).abs() < 1e-15);
        // Zero by convention outside the support.
        assert_eq!(p(0.0, 1.0, 0.5).pdf(-3.0), 0.0);
    }

    #[test]
    fn cdf_examples_and_edges() {
        let e1 = (-1.0f64).exp();
        assert!((p(0.0, 1.0, 0.0).cdf(0.0) - e1).abs() < 1e-15);
        assert!((p(0.0, 1.0, 0.5).cdf(2.0) - (-0.25f64).exp()).abs() < 1e-15);
        assert!((p(0.0, 1.0, 0.2).cdf(1e9) - 1.0).abs() < 1e-12);
        // Outside-support extensions.
        assert_eq!(p(0.0, 1.0, 0.5).cdf(-10.0), 0.0);
        assert_eq!(p(0.0, 1.0, -0.5).cdf(10.0), 1.0);
    }

    #[test]
    fn quantile_identities() {
        let a = (-1.0f64).exp();
        assert!(p(0.0, 1.0, 0.0).inverse_cdf(a).unwrap().abs() < 1e-15);
        assert!(p(0.0, 1.0, 0.5).inverse_cdf(a).unwrap().abs() < 1e-15);
        assert!(matches!(p(0.0, 1.0, 0.0).inverse_cdf(0.0), Err(GevError::Domain(_))));
        assert!(matches!(p(0.0, 1.0, 0.0).inverse_cdf(1.0), Err(GevError::Domain(_))));
    }

    #[test]
    fn cdf_quantile_roundtrip() {
        for &xi in &[-0.3, 0.0, 0.2, 0.7] {
            let params = p(1.5, 0.8, xi);
            for &alpha in &[0.01, 0.3, 0.5, 0.9, 0.999] {
                let y = params.inverse_cdf(alpha).unwrap();
                assert!((params.cdf(y) - alpha).abs() < 1e-10, "xi={xi} alpha={alpha}");
            }
        }
    }

    #[test]
    fn log_score_examples() {
        assert!((p(0.0, 1.0, 0.0).log_score(0.0) - 1.0).abs() < 1e-15);
        assert!((p(0.0, 2.0, 0.0).log_score(0.0) - (1.0 + 2f64.ln())).abs() < 1e-15);
        assert_eq!(p(0.0, 1.0, 0.5).log_score(-3.0), SUPPORT_PENALTY);
    }

    #[test]
    fn log_score_is_negative_log_pdf() {
        for &xi in &[-0.3, 0.0, 0.2] {
            let params = p(0.3, 1.2, xi);
            for &y in &[-0.5, 0.0, 0.7, 2.0] {
                if params.tau(y).is_ok() {
                    assert!(
                        (params.log_score(y) + params.pdf(y).ln()).abs() < 1e-12,
                        "xi={xi} y={y}"
                    );
                }
            }
        }
    }

    #[test]
    fn gumbel_branch_continuity() {
        // |branch difference| < 1e-6 when ξ is just above the switch.
        let near = p(0.2, 1.3, 1e-6);
        let at = p(0.2, 1.3, 0.0);
        for &y in &[-1.0, 0.0, 1.0, 3.0] {
            assert!((near.pdf(y) - at.pdf(y)).abs() < 1e-6);
            assert!((near.log_score(y) - at.log_score(y)).abs() < 1e-6);
            assert!((near.cdf(y) - at.cdf(y)).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_support_violation() {
        assert_eq!(p(0.0, 1.0, 0.5).gradient(-3.0), Err(GevError::SupportViolation));
    }

    #[test]
    fn gradient_mu_sign_flips_at_gumbel_mode() {
        // For Gumbel the score in μ is zero at the mode y = μ.
        let params = p(0.4, 1.0, 0.0);
        assert!(params.gradient(0.4 - 0.1).unwrap()[0] > 0.0);
        assert!(params.gradient(0.4 + 0.1).unwrap()[0] < 0.0);
        assert!(params.gradient(0.4).unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn fisher_symmetry_and_regularity() {
        let info = p(0.0, 1.0, 0.2).fisher_information().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(info[i][j], info[j][i]);
            }
        }
        assert!(matches!(
            p(0.0, 1.0, -0.6).fisher_information(),
            Err(GevError::Regularity(_))
        ));
    }

    #[test]
    fn fisher_interpolation_continuous_at_switch() {
        let inside = p(0.0, 1.0, FISHER_XI_SWITCH - 1e-9).fisher_information().unwrap();
        let outside = p(0.0, 1.0, FISHER_XI_SWITCH + 1e-9).fisher_information().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((inside[i][j] - outside[i][j]).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn natural_gradient_identity() {
        let params = p(0.0, 1.0, 0.3);
        let g = params.gradient(0.5).unwrap();
        let ng = params.natural_gradient(0.5).unwrap();
        let info = params.fisher_information().unwrap();
        let back = mat_vec(&info, &ng);
        for i in 0..3 {
            assert!((back[i] - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn natural_gradient_near_regularity_edge() {
        // The Fisher matrix stays finite down to ξ → −1/2; just below it the
        // regularity error must propagate.
        let params = p(0.0, 1.0, -0.4999999);
        match params.natural_gradient(0.1) {
            Ok(ng) => assert!(ng.iter().all(|v| v.is_finite())),
            Err(GevError::IllConditioned(_)) | Err(GevError::Numerical) => {}
            other => panic!("unexpected result: {other:?}"),
        }
        assert!(matches!(
            p(0.0, 1.0, -0.5).natural_gradient(0.1),
            Err(GevError::Regularity(_))
        ));
    }

    #[test]
    fn mean_examples() {
        assert!((p(0.0, 1.0, 0.0).mean() - EULER_MASCHERONI).abs() < 1e-12);
        assert_eq!(p(0.0, 1.0, 1.0).mean(), f64::INFINITY);
        assert_eq!(p(0.0, 1.0, 1.5).mean(), f64::INFINITY);
        let m = p(0.0, 1.0, 0.2).mean();
        assert!((m - (gamma(0.8) - 1.0) / 0.2).abs() < 1e-12);
    }

    #[test]
    fn cvar_dominates_var() {
        for &xi in &[-0.3, 0.0, 0.2] {
            let params = p(0.0, 1.0, xi);
            for &alpha in &[0.5, 0.9, 0.99] {
                assert!(params.cvar(alpha).unwrap() >= params.var(alpha).unwrap());
            }
        }
        assert!(matches!(p(0.0, 1.0, 1.2).cvar(0.9), Err(GevError::HeavyTail(_))));
    }

    #[test]
    fn cvar_var_gap_vanishes_with_scale() {
        let gap = |sigma: f64| {
            let params = p(0.0, sigma, 0.1);
            params.cvar(0.9).unwrap() - params.var(0.9).unwrap()
        };
        assert!(gap(1e-8) < 1e-7);
        assert!(gap(1e-8) < gap(1.0));
    }

    #[test]
    fn crps_rejects_heavy_tail() {
        assert!(matches!(p(0.0, 1.0, 1.0).crps(0.0), Err(GevError::HeavyTail(_))));
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let params = p(0.0, 1.0, 0.2);
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(params.sample_n(&mut a, 100), params.sample_n(&mut b, 100));
    }
}
