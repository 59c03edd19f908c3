//! Special functions used by the closed-form GEV expressions.
//!
//! Gamma-family functions are backed by `statrs`; the exponential and
//! logarithmic integrals are implemented here since `statrs` does not
//! provide them. All of them are checked against a high-precision
//! reference table in the test suite.

pub use statrs::function::gamma::{digamma, gamma, ln_gamma};

/// Euler–Mascheroni constant γ = −ψ(1).
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Lower incomplete gamma function Γ_l(s, x) = ∫₀ˣ t^{s−1} e^{−t} dt.
pub fn lower_incomplete_gamma(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        // The integral is empty at x = 0; statrs rejects the endpoint.
        0.0
    } else {
        statrs::function::gamma::gamma_li(s, x)
    }
}

/// Exponential integral Ei(x) = ∫_{−∞}^x e^t / t dt (principal value).
///
/// Diverges to −∞ at x = 0.
pub fn exp_integral_ei(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x < 0.0 {
        -e1(-x)
    } else {
        // Power series Ei(x) = γ + ln x + Σ x^k / (k·k!); all terms are
        // positive so there is no cancellation.
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..=700 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < f64::EPSILON * sum.abs() {
                break;
            }
        }
        EULER_MASCHERONI + x.ln() + sum
    }
}

/// Logarithmic integral li(x) = Ei(ln x) for x > 0, x ≠ 1.
pub fn log_integral_li(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NAN
    } else {
        exp_integral_ei(x.ln())
    }
}

/// E₁(z) = ∫_z^∞ e^{−t}/t dt for z > 0.
fn e1(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z <= 1.0 {
        // Alternating series E₁(z) = −γ − ln z + Σ (−1)^{k+1} z^k / (k·k!).
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..=40 {
            term *= -z / k as f64;
            sum -= term / k as f64;
            if term.abs() / (k as f64) < f64::EPSILON {
                break;
            }
        }
        -EULER_MASCHERONI - z.ln() + sum
    } else {
        // Continued fraction E₁(z) = e^{−z} / (z + 1 − 1/(z + 3 − 4/(z + 5 − …)))
        // evaluated with the modified Lentz algorithm.
        let tiny = 1e-300;
        let mut b = z + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for k in 1..=200u32 {
            let a = -((k * k) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < f64::EPSILON {
                break;
            }
        }
        (-z).exp() * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ei_diverges_at_zero() {
        assert_eq!(exp_integral_ei(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn e1_series_and_fraction_agree_at_crossover() {
        let lo = -exp_integral_ei(-1.0 + 1e-12);
        let hi = -exp_integral_ei(-1.0 - 1e-12);
        assert!((lo - hi).abs() < 1e-12, "{lo} vs {hi}");
    }

    #[test]
    fn li_is_ei_of_log() {
        let x: f64 = 0.37;
        assert_eq!(log_integral_li(x), exp_integral_ei(x.ln()));
        assert!(log_integral_li(-1.0).is_nan());
    }
}
