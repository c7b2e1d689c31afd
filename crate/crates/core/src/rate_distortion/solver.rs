//! Numerical `R_p(ε_K, ε_N)`: minimum of `F_p` over score laws meeting both
//! error budgets.
//!
//! Scores live on a fixed grid. For multipliers `(s_K, s_N)` (nats) the
//! Lagrangian
//!
//! ```text
//! I(X; X̂) + p·s_K·E_{μ_K}[d^K] + (1 - p)·s_N·E_{μ_N}[d^N]
//! ```
//!
//! is minimized in two closed-form stages. Given the output law `r`, each
//! channel row is a Gibbs reweighting: `μ_K ∝ r·a`, `μ_N ∝ r·b` with
//! `a_t = e^{-s_K d^K(t)}` and `b_t = e^{-s_N d^N(t)}`. Substituting back leaves
//! `-p ln⟨r, a⟩ - (1 - p) ln⟨r, b⟩`, which depends on `r` only through the point
//! `(⟨r, a⟩, ⟨r, b⟩)` of the convex hull of `{(a_t, b_t)}`; the optimal `r` sits
//! on one edge of that hull's upper-right chain and has at most two atoms.
//!
//! The multipliers are found by nested bisection (`λ_N` outside, `λ_K`
//! inside). When bisection lands on a kink of the dual, the two bracketing
//! primal solutions are mixed so the active constraint holds exactly.

use std::f64::consts::LN_2;

use serde::Serialize;

use super::metric::{ErrorMetric, Side};
use super::{RateError, Result};
use crate::measures::{f_p, DiscreteDistribution, LOCATION_TOLERANCE};

/// Supports with more atoms than this are pruned when it costs nothing.
pub const MAX_SUPPORT: usize = 5;
const NEGLIGIBLE_WEIGHT: f64 = 1e-12;

const PRUNE_OBJECTIVE_SLACK: f64 = 1e-8;

/// Knobs for [`solve_rp`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Uniform score grid size on `[0, 1]`.
    pub grid_points: usize,
    /// Bisection steps per multiplier.
    pub max_iterations: usize,
    /// Multipliers are searched in `[0, dual_upper]` (bits per unit error).
    pub dual_upper: f64,
    /// Allowed constraint violation of the reported laws.
    pub constraint_tolerance: f64,
    /// Allowed primal-dual gap, relative to `1 + rate`.
    pub gap_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid_points: 201,
            max_iterations: 200,
            dual_upper: 1e6,
            constraint_tolerance: 1e-6,
            gap_tolerance: 1e-6,
        }
    }
}

/// One point of the memory-error frontier.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub p: f64,
    pub eps_k: f64,
    pub eps_n: f64,
    /// Bits per key.
    pub rate: f64,
    pub mu_k: DiscreteDistribution,
    pub mu_n: DiscreteDistribution,
    /// Multiplier on the key constraint in `F_p + λ_K E[d^K] + λ_N E[d^N]`.
    pub dual_k: f64,
    pub dual_n: f64,
    pub converged: bool,
    /// Best Lagrangian dual value seen; a certified lower bound on `R_p`.
    pub lower_bound: f64,
}

/// Primal candidate as dense masses on the grid.
#[derive(Debug, Clone)]
struct Candidate {
    mu_k: Vec<f64>,
    mu_n: Vec<f64>,
    key_error: f64,
    nonkey_error: f64,
    /// Dual function value in bits.
    dual: f64,
    lambda_k: f64,
    lambda_n: f64,
}

impl Candidate {
    fn mix(&self, w: f64, other: &Candidate) -> Candidate {
        let blend = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(a, b)| w * a + (1.0 - w) * b).collect()
        };
        Candidate {
            mu_k: blend(&self.mu_k, &other.mu_k),
            mu_n: blend(&self.mu_n, &other.mu_n),
            key_error: w * self.key_error + (1.0 - w) * other.key_error,
            nonkey_error: w * self.nonkey_error + (1.0 - w) * other.nonkey_error,
            dual: self.dual.max(other.dual),
            lambda_k: self.lambda_k,
            lambda_n: self.lambda_n,
        }
    }
}

struct Problem {
    p: f64,
    eps_k: f64,
    eps_n: f64,
    grid: Vec<f64>,
    key_penalty: Vec<f64>,
    nonkey_penalty: Vec<f64>,
    key_allowed: Vec<bool>,
    nonkey_allowed: Vec<bool>,
}

/// Score grid: `grid_points` uniform locations plus the closed-form atoms
/// `{0, 1, e^{-ε_K}}` under log-loss and any tabulated locations.
fn score_grid(points: usize, metrics: [&ErrorMetric; 2], eps_k: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    if metrics.iter().any(|m| m.is_log_loss()) {
        grid.extend([0.0, 1.0, (-eps_k).exp()]);
    }
    for m in metrics {
        if let ErrorMetric::Tabulated(t) = m {
            grid.extend(t.points().iter().map(|&(x, _)| x));
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|b, a| (*b - *a).abs() < LOCATION_TOLERANCE);
    grid
}

impl Problem {
    fn new(
        p: f64,
        metric_k: &ErrorMetric,
        metric_n: &ErrorMetric,
        eps_k: f64,
        eps_n: f64,
        config: &SolverConfig,
    ) -> Result<Self> {
        let grid = score_grid(config.grid_points, [metric_k, metric_n], eps_k);
        let key_penalty: Vec<f64> = grid.iter().map(|&x| metric_k.eval(x)).collect();
        let nonkey_penalty: Vec<f64> = grid.iter().map(|&x| metric_n.eval(x)).collect();
        // A zero budget pins the law to zero-penalty scores; the constraint
        // then holds identically and needs no multiplier.
        let allowed = |d: &[f64], eps: f64| -> Vec<bool> {
            d.iter().map(|&v| v.is_finite() && (eps > 0.0 || v == 0.0)).collect()
        };
        let key_allowed = allowed(&key_penalty, eps_k);
        let nonkey_allowed = allowed(&nonkey_penalty, eps_n);

        let feasible = |d: &[f64], ok: &[bool], eps: f64| d.iter().zip(ok).any(|(&v, &a)| a && v <= eps);
        if !feasible(&key_penalty, &key_allowed, eps_k) {
            return Err(RateError::Infeasible { side: Side::Key, eps: eps_k });
        }
        if !feasible(&nonkey_penalty, &nonkey_allowed, eps_n) {
            return Err(RateError::Infeasible { side: Side::NonKey, eps: eps_n });
        }
        Ok(Self { p, eps_k, eps_n, grid, key_penalty, nonkey_penalty, key_allowed, nonkey_allowed })
    }

    fn s_k(&self, lambda_k: f64) -> f64 {
        lambda_k * LN_2
    }

    fn s_n(&self, lambda_n: f64) -> f64 {
        lambda_n * self.p * LN_2 / (1.0 - self.p)
    }

    /// Exact Lagrangian minimizer for fixed multipliers (bits-scale `λ`).
    fn lagrangian(&self, lambda_k: f64, lambda_n: f64) -> Candidate {
        let (s_k, s_n) = (self.s_k(lambda_k), self.s_n(lambda_n));
        let g = self.grid.len();
        let weight = |allowed: bool, d: f64, s: f64| if allowed { (-s * d).exp() } else { 0.0 };
        let a: Vec<f64> = (0..g).map(|t| weight(self.key_allowed[t], self.key_penalty[t], s_k)).collect();
        let b: Vec<f64> = (0..g).map(|t| weight(self.nonkey_allowed[t], self.nonkey_penalty[t], s_n)).collect();

        let chain = upper_right_chain(&a, &b);
        let (r, big_a, big_b, phi) = best_on_chain(self.p, &chain, &a, &b);

        let mut mu_k = vec![0.0; g];
        let mut mu_n = vec![0.0; g];
        for &(t, mass) in &r {
            mu_k[t] += mass * a[t] / big_a;
            mu_n[t] += mass * b[t] / big_b;
        }
        let expect = |mu: &[f64], d: &[f64]| -> f64 {
            mu.iter().zip(d).filter(|(m, _)| **m > 0.0).map(|(m, v)| m * v).sum()
        };
        let key_error = expect(&mu_k, &self.key_penalty);
        let nonkey_error = expect(&mu_n, &self.nonkey_penalty);
        let p = self.p;
        let dual_nats = -phi - p * s_k * self.eps_k - (1.0 - p) * s_n * self.eps_n;
        Candidate { mu_k, mu_n, key_error, nonkey_error, dual: dual_nats / (p * LN_2), lambda_k, lambda_n }
    }

    /// Smallest `λ_K` meeting the key budget for this `λ_N`.
    fn solve_key(&self, lambda_n: f64, config: &SolverConfig) -> (Candidate, bool) {
        let at_zero = self.lagrangian(0.0, lambda_n);
        if at_zero.key_error <= self.eps_k {
            return (at_zero, true);
        }
        let at_top = self.lagrangian(config.dual_upper, lambda_n);
        if at_top.key_error > self.eps_k + config.constraint_tolerance {
            return (at_top, false);
        }
        let eps = self.eps_k;
        bisect(at_zero, at_top, 0.0, config.dual_upper, config.max_iterations, |c| c.key_error - eps, |l| {
            self.lagrangian(l, lambda_n)
        })
    }

    fn solve(&self, config: &SolverConfig) -> (Candidate, bool) {
        let (at_zero, ok) = self.solve_key(0.0, config);
        if at_zero.nonkey_error <= self.eps_n {
            return (at_zero, ok);
        }
        let (at_top, ok_top) = self.solve_key(config.dual_upper, config);
        if at_top.nonkey_error > self.eps_n + config.constraint_tolerance {
            return (at_top, false);
        }
        let eps = self.eps_n;
        let mut inner_ok = ok_top;
        let (candidate, converged) = bisect(
            at_zero,
            at_top,
            0.0,
            config.dual_upper,
            config.max_iterations,
            |c| c.nonkey_error - eps,
            |l| {
                let (c, ok) = self.solve_key(l, config);
                inner_ok &= ok;
                c
            },
        );
        (candidate, converged && inner_ok)
    }

    fn distribution(&self, masses: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::from_weights(self.grid.iter().copied().zip(masses.iter().copied()))
            .expect("solver masses form a distribution")
    }
}

/// Bisection on a multiplier whose constraint residual is nonincreasing.
///
/// `lo` violates (`residual > 0`), `hi` satisfies. Returns the satisfying
/// endpoint when it is tight, otherwise the mixture of the two bracketing
/// solutions that zeroes the residual.
fn bisect<R, E>(
    mut lo: Candidate,
    mut hi: Candidate,
    mut lo_lambda: f64,
    mut hi_lambda: f64,
    max_iterations: usize,
    residual: R,
    mut evaluate: E,
) -> (Candidate, bool)
where
    R: Fn(&Candidate) -> f64,
    E: FnMut(f64) -> Candidate,
{
    let mut steps = 0;
    while steps < max_iterations {
        let width = hi_lambda - lo_lambda;
        if width <= 1e-12 * hi_lambda.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo_lambda + hi_lambda);
        let c = evaluate(mid);
        let r = residual(&c);
        if r > 0.0 {
            lo = c;
            lo_lambda = mid;
        } else {
            if r > -1e-13 {
                return (c, true);
            }
            hi = c;
            hi_lambda = mid;
        }
        steps += 1;
    }
    let (r_lo, r_hi) = (residual(&lo), residual(&hi));
    let w = r_lo / (r_lo - r_hi);
    (hi.mix(w, &lo), steps < max_iterations)
}

/// Indices of the upper-right boundary of `conv{(a_t, b_t)}`, ordered by
/// increasing `a`. Ties keep the lowest index.
fn upper_right_chain(a: &[f64], b: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..a.len()).filter(|&t| a[t] > 0.0 || b[t] > 0.0).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]).then(b[j].total_cmp(&b[i])).then(i.cmp(&j)));

    // Pareto filter: walking down in a, keep strict improvements in b.
    let mut pareto = Vec::new();
    let mut best_b = f64::NEG_INFINITY;
    for t in order {
        if b[t] > best_b {
            best_b = b[t];
            pareto.push(t);
        }
    }
    pareto.reverse();

    let cross = |o: usize, p: usize, q: usize| (a[p] - a[o]) * (b[q] - b[o]) - (b[p] - b[o]) * (a[q] - a[o]);
    let mut hull: Vec<usize> = Vec::with_capacity(pareto.len());
    for t in pareto {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], t) >= 0.0 {
            hull.pop();
        }
        hull.push(t);
    }
    hull
}

/// Maximizes `p ln A + (1 - p) ln B` over the chain. Returns the output law
/// `r` as `(index, mass)` pairs, the optimal `(A, B)`, and the maximum.
fn best_on_chain(p: f64, chain: &[usize], a: &[f64], b: &[f64]) -> (Vec<(usize, f64)>, f64, f64, f64) {
    let phi = |x: f64, y: f64| p * x.ln() + (1.0 - p) * y.ln();
    let mut best = (vec![(chain[0], 1.0)], a[chain[0]], b[chain[0]], phi(a[chain[0]], b[chain[0]]));
    for &t in &chain[1..] {
        let v = phi(a[t], b[t]);
        if v > best.3 {
            best = (vec![(t, 1.0)], a[t], b[t], v);
        }
    }
    for edge in chain.windows(2) {
        let (i, j) = (edge[0], edge[1]);
        let (da, db) = (a[j] - a[i], b[j] - b[i]);
        if da * db >= 0.0 {
            continue;
        }
        // stationary point of the concave edge profile
        let theta = -(p * da * b[i] + (1.0 - p) * db * a[i]) / (da * db);
        if theta <= 0.0 || theta >= 1.0 {
            continue;
        }
        let (x, y) = (a[i] + theta * da, b[i] + theta * db);
        let v = phi(x, y);
        if v > best.3 {
            best = (vec![(i, 1.0 - theta), (j, theta)], x, y, v);
        }
    }
    best
}

/// Drops the lightest atoms while more than [`MAX_SUPPORT`] remain, keeping
/// the result only if the objective moves by less than `1e-8` and both
/// budgets still hold.
fn prune_support(problem: &Problem, candidate: &Candidate, rate: f64, tolerance: f64) -> Option<(Candidate, f64)> {
    let p = problem.p;
    let mut support: Vec<usize> = (0..problem.grid.len())
        .filter(|&t| candidate.mu_k[t] > 0.0 || candidate.mu_n[t] > 0.0)
        .collect();
    let weight = |t: usize| p * candidate.mu_k[t] + (1.0 - p) * candidate.mu_n[t];
    support.sort_by(|&i, &j| weight(i).total_cmp(&weight(j)).then(i.cmp(&j)));
    // beyond the 5 heaviest atoms, and any atom of negligible weight
    let excess = support.len().saturating_sub(MAX_SUPPORT);
    let dropped: Vec<usize> = support
        .iter()
        .enumerate()
        .filter(|&(rank, &t)| rank < excess || weight(t) < NEGLIGIBLE_WEIGHT)
        .map(|(_, &t)| t)
        .collect();
    if dropped.is_empty() || dropped.len() == support.len() {
        return None;
    }

    let mut pruned = candidate.clone();
    for &t in &dropped {
        pruned.mu_k[t] = 0.0;
        pruned.mu_n[t] = 0.0;
    }
    let renormalize = |mu: &mut Vec<f64>| {
        let total: f64 = mu.iter().sum();
        (total > 0.0).then(|| mu.iter_mut().for_each(|m| *m /= total))
    };
    renormalize(&mut pruned.mu_k)?;
    renormalize(&mut pruned.mu_n)?;
    let expect = |mu: &[f64], d: &[f64]| -> f64 {
        mu.iter().zip(d).filter(|(m, _)| **m > 0.0).map(|(m, v)| m * v).sum()
    };
    pruned.key_error = expect(&pruned.mu_k, &problem.key_penalty);
    pruned.nonkey_error = expect(&pruned.mu_n, &problem.nonkey_penalty);
    if pruned.key_error > problem.eps_k + tolerance || pruned.nonkey_error > problem.eps_n + tolerance {
        return None;
    }
    let new_rate = f_p(p, &problem.distribution(&pruned.mu_k), &problem.distribution(&pruned.mu_n)).ok()?;
    ((new_rate - rate).abs() < PRUNE_OBJECTIVE_SLACK).then_some((pruned, new_rate))
}

/// Computes `R_p(ε_K, ε_N)` for the given metrics.
///
/// The result is deterministic for fixed inputs. When the bisection budget
/// runs out or the primal-dual gap stays above tolerance, the best iterate is
/// returned with `converged = false`.
pub fn solve_rp(
    p: f64,
    metric_k: &ErrorMetric,
    metric_n: &ErrorMetric,
    eps_k: f64,
    eps_n: f64,
    config: &SolverConfig,
) -> Result<FrontierPoint> {
    if !(p > 0.0 && p < 1.0) {
        return Err(RateError::InvalidP(p));
    }
    if metric_k.side() != Side::Key {
        return Err(RateError::WrongSide { expected: Side::Key });
    }
    if metric_n.side() != Side::NonKey {
        return Err(RateError::WrongSide { expected: Side::NonKey });
    }
    for (name, value) in [("eps_K", eps_k), ("eps_N", eps_n)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(RateError::InvalidEpsilon { name, value });
        }
    }
    if config.grid_points < 2 {
        return Err(RateError::InvalidConfig("grid_points must be at least 2".into()));
    }

    let problem = Problem::new(p, metric_k, metric_n, eps_k, eps_n, config)?;
    let (mut candidate, mut converged) = problem.solve(config);

    let mut rate = f_p(p, &problem.distribution(&candidate.mu_k), &problem.distribution(&candidate.mu_n))?;
    if let Some((pruned, pruned_rate)) = prune_support(&problem, &candidate, rate, config.constraint_tolerance) {
        candidate = pruned;
        rate = pruned_rate;
    }

    let tol = config.constraint_tolerance;
    converged &= candidate.key_error <= eps_k + tol && candidate.nonkey_error <= eps_n + tol;
    converged &= rate - candidate.dual <= config.gap_tolerance * (1.0 + rate);

    let dual_k = if candidate.key_error < eps_k - tol { 0.0 } else { candidate.lambda_k };
    let dual_n = if candidate.nonkey_error < eps_n - tol { 0.0 } else { candidate.lambda_n };
    Ok(FrontierPoint {
        p,
        eps_k,
        eps_n,
        rate: rate.max(0.0),
        mu_k: problem.distribution(&candidate.mu_k),
        mu_n: problem.distribution(&candidate.mu_n),
        dual_k,
        dual_n,
        converged,
        lower_bound: candidate.dual,
    })
}

/// Brute-force `R_p` for FNR/FPR metrics: minimum of `F_p(Bern(a), Bern(b))`
/// over a `grid_size × grid_size` grid on `[1 - ε_K, 1] × [0, ε_N]`.
///
/// Uses the output-entropy form `h(pa + (1-p)b) - p h(a) - (1-p) h(b)` of the
/// mutual information, independent of the mixture identity the solver uses.
pub fn rp_binary_oracle(p: f64, eps_k: f64, eps_n: f64, grid_size: usize) -> Result<f64> {
    use rayon::prelude::*;

    if !(p > 0.0 && p < 1.0) {
        return Err(RateError::InvalidP(p));
    }
    for (name, value) in [("eps_K", eps_k), ("eps_N", eps_n)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(RateError::InvalidEpsilon { name, value });
        }
    }
    if grid_size < 100 {
        return Err(RateError::InvalidConfig(format!("oracle grid needs at least 100 points, got {grid_size}")));
    }
    let eps_k = eps_k.min(1.0);
    let eps_n = eps_n.min(1.0);
    let axis = |lo: f64, width: f64| -> Vec<f64> {
        if width == 0.0 {
            vec![lo]
        } else {
            (0..grid_size).map(|i| lo + width * i as f64 / (grid_size - 1) as f64).collect()
        }
    };
    let a_axis = axis(1.0 - eps_k, eps_k);
    let b_axis = axis(0.0, eps_n);

    let h = |x: f64| {
        let term = |v: f64| if v <= 0.0 { 0.0 } else { -v * v.log2() };
        term(x) + term(1.0 - x)
    };
    let best = a_axis
        .par_iter()
        .map(|&a| {
            let ha = h(a);
            b_axis
                .iter()
                .map(|&b| (h(p * a + (1.0 - p) * b) - p * ha - (1.0 - p) * h(b)) / p)
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best.max(0.0))
}
