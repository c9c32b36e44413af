//! Finite-sample lower bounds on region probabilities and Wishart trace and
//! log-determinant concentration. Bounds are returned unclamped and may be
//! negative.

use super::special::{digamma, trigamma};
use crate::error::{Error, Result};

/// `-½ log ½ - ¼`, the likelihood margin that forces the MLE into the
/// region.
pub const MLE_EPSILON: f64 = 0.5 * std::f64::consts::LN_2 - 0.25;

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidRange(msg()))
    }
}

/// Lower bound on `P(Σ_v̂ ∈ Δ_{2S_n})` from Chebyshev bounds on
/// `tr(S Σ*⁻¹)` and `log det(S Σ*⁻¹)`.
pub fn mle_region_lower_bound(n: usize, p: usize) -> Result<f64> {
    require(p >= 1 && n > p, || format!("need n > p ≥ 1, got n = {n}, p = {p}"))?;
    let (nf, pf) = (n as f64, p as f64);
    let e2 = MLE_EPSILON * MLE_EPSILON;
    let mut tri = 0.0;
    let mut di = 0.0;
    for i in 1..=p {
        let x = (nf - i as f64) / 2.0;
        tri += trigamma(x)?;
        di += digamma(x)?;
    }
    let centered = pf * (2.0 / (nf - 1.0)).ln() + di;
    Ok(1.0 - 2.0 * (nf - 1.0) * pf / (nf * nf * e2) - (tri + centered * centered) / e2)
}

/// Leading-order form `1 - 4p / (n ε²)` of [`mle_region_lower_bound`].
pub fn mle_region_lower_bound_asymptotic(n: usize, p: usize) -> f64 {
    1.0 - 4.0 * p as f64 / (n as f64 * MLE_EPSILON * MLE_EPSILON)
}

/// `√((2 + κ√p)/(1 + κ√p)) - √((n-1)/n) - √(p/n)`.
pub fn lse_epsilon(n: usize, p: usize, kappa: f64) -> f64 {
    let (nf, pf) = (n as f64, p as f64);
    let k = kappa * pf.sqrt();
    ((2.0 + k) / (1.0 + k)).sqrt() - ((nf - 1.0) / nf).sqrt() - (pf / nf).sqrt()
}

/// `1 - 4 exp(-n ε² / 2)` for the least squares estimator, where `κ` bounds
/// the condition number of the true covariance. Valid for `n ≥ 15` and
/// `ε > 0`.
pub fn lse_region_lower_bound(n: usize, p: usize, kappa: f64) -> Result<f64> {
    require(p >= 1, || format!("need p ≥ 1, got {p}"))?;
    require(kappa >= 1.0, || format!("condition number must be ≥ 1, got {kappa}"))?;
    if n < 15 {
        return Err(Error::HypothesisViolated(format!("requires n ≥ 15, got n = {n}")));
    }
    let eps = lse_epsilon(n, p, kappa);
    if !(eps > 0.0) {
        return Err(Error::HypothesisViolated(format!(
            "requires ε(n) > 0, got ε = {eps:.6} at n = {n}, p = {p}, κ = {kappa}"
        )));
    }
    Ok(1.0 - 4.0 * (-(n as f64) * eps * eps / 2.0).exp())
}

/// Lower bounds on `P(|tr W_n - np| ≤ ε)` for white `W_p(n, I)`, where
/// `tr W_n ~ χ²_{np}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceBounds {
    pub chebyshev: f64,
    pub laurent_massart: f64,
}

pub fn trace_bounds(n: usize, p: usize, eps: f64) -> Result<TraceBounds> {
    require(n >= 1 && p >= 1, || format!("need n, p ≥ 1, got n = {n}, p = {p}"))?;
    require(eps > 0.0, || format!("need ε > 0, got {eps}"))?;
    let d = (n * p) as f64;
    let chebyshev = 1.0 - 2.0 * d / (eps * eps);
    let upper = (-0.5 * (d + eps - (d * (d + 2.0 * eps)).sqrt())).exp();
    let lower = (-eps * eps / (4.0 * d)).exp();
    Ok(TraceBounds { chebyshev, laurent_massart: 1.0 - upper - lower })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogdetMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of `log det W_n`, `W_n ~ W_p(n, I)`.
pub fn logdet_moments(n: usize, p: usize) -> Result<LogdetMoments> {
    require(p >= 1 && n >= p, || format!("need n ≥ p ≥ 1, got n = {n}, p = {p}"))?;
    let mut mean = p as f64 * std::f64::consts::LN_2;
    let mut variance = 0.0;
    for i in 1..=p {
        let x = (n + 1 - i) as f64 / 2.0;
        mean += digamma(x)?;
        variance += trigamma(x)?;
    }
    Ok(LogdetMoments { mean, variance })
}

/// Chebyshev bound on `P(|log det W_n - p log n| ≤ ε)`.
pub fn logdet_chebyshev_bound(n: usize, p: usize, eps: f64) -> Result<f64> {
    require(eps > 0.0, || format!("need ε > 0, got {eps}"))?;
    let m = logdet_moments(n, p)?;
    let bias = m.mean - p as f64 * (n as f64).ln();
    Ok(1.0 - (m.variance + bias * bias) / (eps * eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_value() {
        assert!((MLE_EPSILON - 0.096_573_590_279_972_65).abs() < 1e-15);
    }

    #[test]
    fn mle_bound_limits() {
        assert!(mle_region_lower_bound(5, 5).is_err());
        let b: Vec<f64> = [100, 1_000, 1_000_000].iter().map(|&n| mle_region_lower_bound(n, 3).unwrap()).collect();
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(b[2] > 0.99);
        assert!(b[0] < 0.0);
    }

    #[test]
    fn mle_bound_matches_asymptotic_to_second_order() {
        let scaled: Vec<f64> = [1_000usize, 3_000, 10_000, 30_000, 100_000]
            .iter()
            .map(|&n| {
                let d = mle_region_lower_bound(n, 5).unwrap() - mle_region_lower_bound_asymptotic(n, 5);
                d * (n as f64).powi(2)
            })
            .collect();
        let spread = scaled.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(spread < 1e5, "{scaled:?}");
        // the scaled gap settles rather than growing with n
        assert!((scaled[4] - scaled[3]).abs() < 0.05 * scaled[4].abs().max(1.0));
    }

    #[test]
    fn lse_bound() {
        let eps = lse_epsilon(16, 4, 1.0);
        assert!((eps - ((4.0f64 / 3.0).sqrt() - (15.0f64 / 16.0).sqrt() - 0.5)).abs() < 1e-15);
        assert!((eps + 0.313).abs() < 1e-3);
        assert!(matches!(lse_region_lower_bound(16, 4, 1.0), Err(Error::HypothesisViolated(_))));
        assert!(matches!(lse_region_lower_bound(14, 1, 1.0), Err(Error::HypothesisViolated(_))));
        assert!(lse_region_lower_bound(100, 1, 0.5).is_err());
        let limit = ((2.0 + 2.0) / (1.0 + 2.0f64)).sqrt() - 1.0;
        assert!((lse_epsilon(100_000_000, 4, 1.0) - limit).abs() < 1e-3);
        assert!(lse_region_lower_bound(1_000_000, 4, 1.0).unwrap() > 0.999_999);
    }

    #[test]
    fn trace_bound_values() {
        let b = trace_bounds(10, 10, 20.0).unwrap();
        assert!((b.chebyshev - 0.5).abs() < 1e-15);
        let far = trace_bounds(10, 10, 1e6).unwrap();
        assert!(far.chebyshev > 0.999 && far.laurent_massart > 0.999);
        assert!(trace_bounds(10, 10, 0.0).is_err());
    }

    #[test]
    fn logdet_single_factor() {
        let m = logdet_moments(7, 1).unwrap();
        assert!((m.mean - (std::f64::consts::LN_2 + digamma(3.5).unwrap())).abs() < 1e-15);
        assert!((m.variance - trigamma(3.5).unwrap()).abs() < 1e-15);
        assert!(logdet_moments(3, 4).is_err());
    }

    #[test]
    fn logdet_mean_approaches_p_log_n() {
        let gaps: Vec<f64> = [100, 1_000, 10_000]
            .iter()
            .map(|&n| (logdet_moments(n, 4).unwrap().mean - 4.0 * (n as f64).ln()).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        assert!(gaps[2] < 1e-2);
        assert!(logdet_chebyshev_bound(10_000, 4, 0.5).unwrap() > 0.99);
    }
}
