//! Closed-form optimizers in the sparse limit `p → 0`, the first-order
//! correction in `p`, and the finite-`n` memory lower bound.

use std::f64::consts::LN_2;

use serde::Serialize;

use super::{RateError, Result};
use crate::measures::{chi_squared, kl_divergence, DiscreteDistribution};

/// Optimal score laws and rate for FNR/FPR constraints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryOptimum {
    pub mu_k: DiscreteDistribution,
    pub mu_n: DiscreteDistribution,
    /// Bits per key.
    pub rate: f64,
}

/// Optimal score laws and rate for log-loss constraints.
///
/// Keys all get score `x_star`; a `q_star` fraction of non-keys get the same
/// score and the rest get 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLossOptimum {
    pub x_star: f64,
    pub q_star: f64,
    pub mu_k: DiscreteDistribution,
    pub mu_n: DiscreteDistribution,
    /// Bits per key, equal to `log2(1 / q_star)`.
    pub rate: f64,
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(RateError::InvalidEpsilon { name, value })
    }
}

fn check_binary_regime(eps_k: f64, eps_n: f64) -> Result<()> {
    check_rate("eps_K", eps_k)?;
    check_rate("eps_N", eps_n)?;
    if eps_k + eps_n >= 1.0 {
        return Err(RateError::TrivialRegime { eps_k, eps_n });
    }
    Ok(())
}

/// `μ_K* = Bern(1 - ε_K)`, `μ_N* = Bern(ε_N)`, rate `KL(μ_K* ‖ μ_N*)`.
///
/// Fails with [`RateError::TrivialRegime`] when `ε_K + ε_N ≥ 1`: there any
/// common score law meets both constraints and the rate is zero.
pub fn optimal_binary(eps_k: f64, eps_n: f64) -> Result<BinaryOptimum> {
    check_binary_regime(eps_k, eps_n)?;
    let mu_k = DiscreteDistribution::bernoulli(1.0 - eps_k)?;
    let mu_n = DiscreteDistribution::bernoulli(eps_n)?;
    let rate = kl_divergence(&mu_k, &mu_n);
    Ok(BinaryOptimum { mu_k, mu_n, rate })
}

/// Log-loss optimum: `x* = e^{-ε_K}`, `q* = ε_N / (-ln(1 - x*))`.
///
/// Both budgets are in nats. Requires `e^{-ε_K} + e^{-ε_N} ≥ 1`; at equality
/// `q* = 1` and the rate is zero.
pub fn optimal_logloss(eps_k: f64, eps_n: f64) -> Result<LogLossOptimum> {
    for (name, value) in [("eps_K", eps_k), ("eps_N", eps_n)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(RateError::InvalidEpsilon { name, value });
        }
    }
    let x_star = (-eps_k).exp();
    // -ln(1 - x*) computed without cancellation for x* near 1
    let nonkey_penalty = -(-eps_k).exp_m1().abs().ln();
    let q_raw = eps_n / nonkey_penalty;
    if q_raw > 1.0 + 1e-12 {
        return Err(RateError::LogLossRegime { eps_k, eps_n });
    }
    let q_star = q_raw.min(1.0);
    let mu_k = DiscreteDistribution::point(x_star)?;
    let mu_n = DiscreteDistribution::new([(0.0, 1.0 - q_star), (x_star, q_star)])?;
    let rate = -q_star.log2();
    Ok(LogLossOptimum { x_star, q_star, mu_k, mu_n, rate })
}

/// `KL - p·χ²/(2 ln 2)` for the binary optimum: the rate to first order in `p`.
pub fn first_order_rate(eps_k: f64, eps_n: f64, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(RateError::InvalidP(p));
    }
    let opt = optimal_binary(eps_k, eps_n)?;
    let chi2 = chi_squared(&opt.mu_k, &opt.mu_n);
    Ok(opt.rate - p * chi2 / (2.0 * LN_2))
}

/// Total bits any tester for `n` keys needs when its per-key cost is
/// `fp_value`: `max(0, n·fp_value - log2(8n)/2)`.
pub fn memory_lower_bound(n: u64, fp_value: f64) -> Result<f64> {
    if n == 0 {
        return Err(RateError::InvalidKeyCount);
    }
    check_rate("fp_value", fp_value)?;
    let n = n as f64;
    Ok((n * fp_value - (8.0 * n).log2() / 2.0).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_examples() {
        let opt = optimal_binary(0.0, 2f64.powi(-10)).unwrap();
        assert!((opt.rate - 10.0).abs() < 1e-12);
        let opt = optimal_binary(0.1, 0.1).unwrap();
        assert!((opt.rate - 2.535940).abs() < 1e-6);
        assert!((opt.mu_k.mass_at(1.0) - 0.9).abs() < 1e-15);
        assert!((opt.mu_n.mass_at(1.0) - 0.1).abs() < 1e-15);
        assert!(matches!(optimal_binary(0.6, 0.5), Err(RateError::TrivialRegime { .. })));
        assert!(matches!(optimal_binary(0.5, 0.5), Err(RateError::TrivialRegime { .. })));
        assert!(optimal_binary(-0.1, 0.5).is_err());
    }

    #[test]
    fn logloss_examples() {
        let opt = optimal_logloss(0.1, 0.2).unwrap();
        assert!((opt.x_star - 0.904837).abs() < 1e-6);
        assert!((opt.q_star - 0.085028).abs() < 1e-6);
        assert!((opt.rate - 3.555919).abs() < 1e-6);
        assert!((opt.rate - kl_divergence(&opt.mu_k, &opt.mu_n)).abs() < 1e-12);

        let opt = optimal_logloss(LN_2, LN_2).unwrap();
        assert_eq!(opt.q_star, 1.0);
        assert_eq!(opt.rate, 0.0);
        assert_eq!(opt.mu_n, opt.mu_k);

        assert!(matches!(optimal_logloss(2.0, 2.0), Err(RateError::LogLossRegime { .. })));
        assert!(optimal_logloss(0.0, 0.2).is_err());
    }

    #[test]
    fn first_order_examples() {
        // 0.8·log2 9 - 0.01·(64/9)/(2 ln 2)
        assert!((first_order_rate(0.1, 0.1, 0.01).unwrap() - 2.484644).abs() < 1e-6);
        assert!((first_order_rate(0.1, 0.1, 0.0).unwrap() - 2.535940).abs() < 1e-6);
        assert!((first_order_rate(0.0, 0.5, 0.1).unwrap() - 0.927865).abs() < 1e-6);
        assert!(first_order_rate(0.6, 0.6, 0.1).is_err());
        assert!(first_order_rate(0.1, 0.1, -1.0).is_err());
    }

    #[test]
    fn memory_bound_examples() {
        assert_eq!(memory_lower_bound(1024, 2.0).unwrap(), 2041.5);
        assert_eq!(memory_lower_bound(1, 0.1).unwrap(), 0.0);
        assert!((memory_lower_bound(1000, 1.245112).unwrap() - 1238.63).abs() < 0.01);
        assert!(memory_lower_bound(0, 1.0).is_err());
    }
}
