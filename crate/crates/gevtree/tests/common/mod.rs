//! Shared numeric oracles for the integration suites.
//!
//! Each test binary compiles its own copy and uses a subset of these.
#![allow(dead_code)]

/// First-order remainder ∫ (1 − F) dy of a GEV tail integral truncated at
/// the quantile with residual mass `m`: 1 − F ≈ τ beyond that point and
/// ∫ τ dy = σ·τ_m^{1−ξ}/(1−ξ) with τ_m ≈ m. Used to keep truncated
/// quadrature oracles accurate for heavy shapes without integrating to the
/// unrepresentable upper endpoint.
pub fn gev_tail_remainder(sigma: f64, xi: f64, m: f64) -> f64 {
    if xi.abs() < 1e-9 {
        sigma * m
    } else {
        sigma * m.powf(1.0 - xi) / (1.0 - xi)
    }
}

/// Adaptive Simpson quadrature with an absolute tolerance budget.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }

    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 60)
}

/// Two-sided asymptotic p-value of the Kolmogorov–Smirnov statistic.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let t = (n as f64).sqrt() * d;
    let lambda = (t + 0.12 + 0.11 / (n as f64).sqrt()) * d * (n as f64).sqrt() / t.max(1e-300);
    // Kolmogorov series Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}.
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64).powi(2) * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS distance of a sample against the uniform distribution on (0, 1).
pub fn ks_uniform_statistic(sample: &mut [f64]) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &u) in sample.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((u - lo).abs()).max((hi - u).abs());
    }
    d
}
