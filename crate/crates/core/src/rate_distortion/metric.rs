use serde::{Deserialize, Serialize};

use super::{RateError, Result};
use crate::measures::LOCATION_TOLERANCE;

/// Which population a metric scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Key,
    NonKey,
}

/// A penalty table on explicit score locations; every other score is
/// infinitely penalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedMetric {
    side: Side,
    points: Vec<(f64, f64)>,
}

impl TabulatedMetric {
    /// Rejects tables that do not give the perfect score zero penalty
    /// (`d(1) = 0` for keys, `d(0) = 0` for non-keys).
    pub fn new(side: Side, mut points: Vec<(f64, f64)>) -> Result<Self> {
        for &(x, d) in &points {
            if !(0.0..=1.0).contains(&x) {
                return Err(RateError::ScoreOutOfRange(x));
            }
            if d.is_nan() || d < 0.0 {
                return Err(RateError::InvalidMetric(format!("penalty {d} at {x} is negative")));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[1].0 - w[0].0 < LOCATION_TOLERANCE) {
            return Err(RateError::InvalidMetric("duplicate tabulated location".into()));
        }
        let perfect = match side {
            Side::Key => 1.0,
            Side::NonKey => 0.0,
        };
        let ok = points
            .iter()
            .any(|&(x, d)| (x - perfect).abs() < LOCATION_TOLERANCE && d == 0.0);
        if !ok {
            return Err(RateError::InvalidMetric(format!(
                "tabulated {side:?} metric must have zero penalty at {perfect}"
            )));
        }
        Ok(Self { side, points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn value(&self, x: f64) -> f64 {
        self.points
            .iter()
            .find(|(loc, _)| (loc - x).abs() < LOCATION_TOLERANCE)
            .map_or(f64::INFINITY, |&(_, d)| d)
    }
}

/// Per-query error `d(x̂)` for a score `x̂ ∈ [0, 1]`.
///
/// The binary metrics are unitless rates; the log-loss metrics are in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMetric {
    /// `1 - x` on keys.
    Fnr,
    /// `x` on non-keys.
    Fpr,
    /// `-ln x` on keys.
    LogLossKey,
    /// `-ln(1 - x)` on non-keys.
    LogLossNonKey,
    Tabulated(TabulatedMetric),
}

impl ErrorMetric {
    pub fn side(&self) -> Side {
        match self {
            ErrorMetric::Fnr | ErrorMetric::LogLossKey => Side::Key,
            ErrorMetric::Fpr | ErrorMetric::LogLossNonKey => Side::NonKey,
            ErrorMetric::Tabulated(t) => t.side,
        }
    }

    pub fn is_log_loss(&self) -> bool {
        matches!(self, ErrorMetric::LogLossKey | ErrorMetric::LogLossNonKey)
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, ErrorMetric::Fnr | ErrorMetric::Fpr)
    }

    /// Unchecked penalty; callers guarantee `x ∈ [0, 1]`.
    pub(crate) fn eval(&self, x: f64) -> f64 {
        match self {
            ErrorMetric::Fnr => 1.0 - x,
            ErrorMetric::Fpr => x,
            ErrorMetric::LogLossKey => {
                if x <= 0.0 {
                    f64::INFINITY
                } else {
                    -x.ln()
                }
            }
            ErrorMetric::LogLossNonKey => {
                if x >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-x).ln_1p()
                }
            }
            ErrorMetric::Tabulated(t) => t.value(x),
        }
    }
}

/// The metric's penalty at score `x`.
pub fn metric_value(metric: &ErrorMetric, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(RateError::ScoreOutOfRange(x));
    }
    Ok(metric.eval(x))
}
