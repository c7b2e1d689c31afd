//! The memory-error frontier of membership testing.
//!
//! A tester that scores keys with law `μ_K` and non-keys with law `μ_N` needs
//! at least `F_p(μ_K, μ_N)` bits per key (up to `log2(8n)/(2n)`), where
//! `p = n/u`. Minimizing over the laws allowed by the error budgets gives the
//! rate `R_p(ε_K, ε_N)`, computed here numerically ([`solve_rp`]) and, for
//! `p → 0`, in closed form ([`optimal_binary`], [`optimal_logloss`]).

mod closed_form;
mod metric;
mod solver;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use closed_form::{
    first_order_rate, memory_lower_bound, optimal_binary, optimal_logloss, BinaryOptimum, LogLossOptimum,
};
pub use metric::{metric_value, ErrorMetric, Side, TabulatedMetric};
pub use solver::{rp_binary_oracle, solve_rp, FrontierPoint, SolverConfig, MAX_SUPPORT};

use crate::measures::MeasureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("score {0} is outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("{name} = {value} must be a finite nonnegative number")]
    InvalidEpsilon { name: &'static str, value: f64 },
    #[error("trivial regime: eps_K + eps_N = {} >= 1, rate 0 is achievable with mu_K = mu_N", eps_k + eps_n)]
    TrivialRegime { eps_k: f64, eps_n: f64 },
    #[error("log-loss regime violated: exp(-{eps_k}) + exp(-{eps_n}) < 1")]
    LogLossRegime { eps_k: f64, eps_n: f64 },
    #[error("p = {0} must lie in (0, 1)")]
    InvalidP(f64),
    #[error("key count must be at least 1")]
    InvalidKeyCount,
    #[error("metric is on the wrong side, expected a {expected:?} metric")]
    WrongSide { expected: Side },
    #[error("no score meets the {side:?} budget {eps}")]
    Infeasible { side: Side, eps: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

pub type Result<T> = std::result::Result<T, RateError>;

/// Which closed form applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// FNR / FPR budgets.
    Binary,
    /// Log-loss budgets in nats.
    LogLoss,
}

impl Regime {
    pub fn metrics(self) -> (ErrorMetric, ErrorMetric) {
        match self {
            Regime::Binary => (ErrorMetric::Fnr, ErrorMetric::Fpr),
            Regime::LogLoss => (ErrorMetric::LogLossKey, ErrorMetric::LogLossNonKey),
        }
    }
}

/// Every rate this crate can say about one `(ε_K, ε_N, p, n)`, in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    /// Sparse-limit rate, when a closed form applies.
    pub closed_form_rate: Option<f64>,
    /// Per-key rate from [`solve_rp`].
    pub solver_rate: f64,
    /// `KL - p·χ²/(2 ln 2)`; binary regime only.
    pub first_order_rate: Option<f64>,
    /// Total-bit lower bound for `n` keys.
    pub finite_n_bound_total: Option<f64>,
}

pub fn rate_report(
    regime: Regime,
    eps_k: f64,
    eps_n: f64,
    p: f64,
    n: Option<u64>,
    config: &SolverConfig,
) -> Result<RateReport> {
    let (metric_k, metric_n) = regime.metrics();
    let closed_form_rate = match regime {
        Regime::Binary => match optimal_binary(eps_k, eps_n) {
            Ok(opt) => Some(opt.rate),
            Err(RateError::TrivialRegime { .. }) => Some(0.0),
            Err(e) => return Err(e),
        },
        Regime::LogLoss => optimal_logloss(eps_k, eps_n).ok().map(|o| o.rate),
    };
    let solver_rate = solve_rp(p, &metric_k, &metric_n, eps_k, eps_n, config)?.rate;
    let first_order_rate = match regime {
        Regime::Binary => first_order_rate(eps_k, eps_n, p).ok().map(|r| r.max(0.0)),
        Regime::LogLoss => None,
    };
    let finite_n_bound_total = n.map(|n| memory_lower_bound(n, solver_rate)).transpose()?;
    Ok(RateReport { closed_form_rate, solver_rate, first_order_rate, finite_n_bound_total })
}

/// Solves every `p` in `ps`; points come back in input order.
pub fn frontier(
    ps: &[f64],
    metric_k: &ErrorMetric,
    metric_n: &ErrorMetric,
    eps_k: f64,
    eps_n: f64,
    config: &SolverConfig,
) -> Result<Vec<FrontierPoint>> {
    ps.par_iter()
        .map(|&p| solve_rp(p, metric_k, metric_n, eps_k, eps_n, config))
        .collect()
}

/// CSV header of [`write_frontier_csv`].
pub const FRONTIER_CSV_HEADER: [&str; 7] = ["p", "eps_K", "eps_N", "rate_bits_per_key", "dual_K", "dual_N", "converged"];

/// Writes one row per point; `format` renders each float.
pub fn write_frontier_csv<W: Write>(
    out: W,
    points: &[FrontierPoint],
    format: impl Fn(f64) -> String,
) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(FRONTIER_CSV_HEADER)?;
    for pt in points {
        writer.write_record([
            format(pt.p),
            format(pt.eps_k),
            format(pt.eps_n),
            format(pt.rate),
            format(pt.dual_k),
            format(pt.dual_n),
            pt.converged.to_string(),
        ])?;
    }
    writer.flush()
}

/// Sidecar document holding the optimizer laws of each frontier row.
#[derive(Debug, Serialize)]
pub struct FrontierSidecar<'a> {
    pub points: Vec<SidecarRow<'a>>,
}

#[derive(Debug, Serialize)]
pub struct SidecarRow<'a> {
    pub p: f64,
    pub mu_k: &'a crate::measures::DiscreteDistribution,
    pub mu_n: &'a crate::measures::DiscreteDistribution,
}

impl<'a> FrontierSidecar<'a> {
    pub fn new(points: &'a [FrontierPoint]) -> Self {
        Self {
            points: points.iter().map(|pt| SidecarRow { p: pt.p, mu_k: &pt.mu_k, mu_n: &pt.mu_n }).collect(),
        }
    }
}
