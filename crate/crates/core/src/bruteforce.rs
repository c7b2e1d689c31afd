//! Exhaustive oracles for tiny instances.
//!
//! [`exhaustive_fpr`] counts accepted hash rows over all of `F_q^m`.
//! [`optimal_tiny_tester`] searches every deterministic tester with a few
//! bits of memory over a small universe and returns its exact error frontier.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::galois::{dot_unchecked, FieldVector};
use crate::measures::{f_p, DiscreteDistribution, MeasureError};
use crate::rate_distortion::{memory_lower_bound, RateError};

/// Largest exhaustive hash-row enumeration, in bits (`m·log2 q`).
pub const MAX_FPR_BITS: f64 = 24.0;
/// Largest tester enumeration: `(2^bits)^C(u,n) · 2^(u·2^bits)`.
pub const MAX_TESTER_ENUMERATION: f64 = 1e8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("invalid tiny tester spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Rate(#[from] RateError),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Exact fraction of `h ∈ F_q^m` with `⟨h, y⟩ = 0`.
pub fn exhaustive_fpr(y: &FieldVector) -> Result<Ratio<u64>> {
    let field = y.field();
    let q = field.order();
    let m = y.len();
    if m as f64 * field.bits_per_element() > MAX_FPR_BITS + 1e-9 {
        return Err(OracleError::TooLarge(format!("q = {q}, m = {m} exceeds 2^24 rows")));
    }
    let total = q.pow(m as u32);
    let accepted = (0..total)
        .into_par_iter()
        .filter(|&index| {
            let mut rest = index;
            let h: Vec<u64> = (0..m)
                .map(|_| {
                    let d = rest % q;
                    rest /= q;
                    d
                })
                .collect();
            dot_unchecked(field, &h, y.coords()) == 0
        })
        .count() as u64;
    Ok(Ratio::new(accepted, total))
}

/// Universe size, key count and memory of a tiny tester search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TinyTesterSpec {
    pub u: u32,
    pub n: u32,
    pub memory_bits: u32,
}

fn binomial(n: u32, k: u32) -> u64 {
    (0..k as u64).fold(1, |acc, i| acc * (n as u64 - i) / (i + 1))
}

impl TinyTesterSpec {
    /// Requires `1 ≤ n < u ≤ 8`, `n ≤ 3`, `memory_bits ≤ 3` and an
    /// enumeration of at most `10^8` testers.
    pub fn new(u: u32, n: u32, memory_bits: u32) -> Result<Self> {
        let invalid = |msg: String| Err(OracleError::InvalidSpec(msg));
        if u > 8 {
            return invalid(format!("u = {u} exceeds 8"));
        }
        if n == 0 || n >= u {
            return invalid(format!("need 1 <= n < u, got n = {n}, u = {u}"));
        }
        if n > 3 {
            return invalid(format!("n = {n} exceeds 3"));
        }
        if memory_bits > 3 {
            return invalid(format!("memory_bits = {memory_bits} exceeds 3"));
        }
        let spec = Self { u, n, memory_bits };
        let size = spec.enumeration_size();
        if size > MAX_TESTER_ENUMERATION {
            return Err(OracleError::TooLarge(format!("{size:e} testers exceed 1e8")));
        }
        Ok(spec)
    }

    pub fn states(&self) -> usize {
        1 << self.memory_bits
    }

    pub fn key_sets(&self) -> u64 {
        binomial(self.u, self.n)
    }

    /// Number of (Init, Query) pairs.
    pub fn enumeration_size(&self) -> f64 {
        let states = self.states() as f64;
        states.powf(self.key_sets() as f64) * 2f64.powf(self.u as f64 * states)
    }

    /// Key sets as bitmasks over the universe, in ascending order.
    pub fn key_set_masks(&self) -> Vec<u8> {
        (0u16..1 << self.u).filter(|m| m.count_ones() == self.n).map(|m| m as u8).collect()
    }
}

/// One Pareto-optimal tester.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TinyTester {
    /// Average FNR over uniform key sets and their keys.
    pub eps_k: Ratio<u64>,
    /// Average FPR over uniform key sets and their non-keys.
    pub eps_n: Ratio<u64>,
    /// Memory state chosen for each key set, in [`TinyTesterSpec::key_set_masks`] order.
    pub init: Vec<u8>,
    /// Accepted universe elements of each state, as bitmasks.
    pub query: Vec<u8>,
}

/// Integer error totals of a partial Init choice, with back-pointers.
#[derive(Clone)]
struct Partial {
    misses: u64,
    false_hits: u64,
    init: Vec<u8>,
}

fn pareto_insert(front: &mut Vec<Partial>, cand: Partial) {
    if front.iter().any(|f| f.misses <= cand.misses && f.false_hits <= cand.false_hits) {
        return;
    }
    front.retain(|f| !(cand.misses <= f.misses && cand.false_hits <= f.false_hits));
    front.push(cand);
}

/// Exact Pareto frontier of Init choices for one Query table.
///
/// Errors are additive over key sets, so pruning dominated partial sums after
/// each key set gives the same frontier as enumerating every Init map.
fn frontier_for_table(table: &[u8], key_sets: &[u8]) -> Vec<Partial> {
    let mut front = vec![Partial { misses: 0, false_hits: 0, init: Vec::new() }];
    for &keys in key_sets {
        let mut next: Vec<Partial> = Vec::new();
        for partial in &front {
            for (state, &accept) in table.iter().enumerate() {
                let mut init = partial.init.clone();
                init.push(state as u8);
                pareto_insert(
                    &mut next,
                    Partial {
                        misses: partial.misses + (keys & !accept).count_ones() as u64,
                        false_hits: partial.false_hits + (accept & !keys).count_ones() as u64,
                        init,
                    },
                );
            }
        }
        front = next;
    }
    front
}

/// Pareto set of `(ε_K, ε_N)` over all deterministic testers, sorted by
/// `ε_K`, each with a witnessing tester.
pub fn optimal_tiny_tester(spec: &TinyTesterSpec) -> Result<Vec<TinyTester>> {
    let spec = TinyTesterSpec::new(spec.u, spec.n, spec.memory_bits)?;
    let key_sets = spec.key_set_masks();
    let states = spec.states();
    let universe_tables = 1u64 << spec.u;
    let table_count = universe_tables.pow(states as u32);

    let per_table: Vec<(Vec<u8>, Vec<Partial>)> = (0..table_count)
        .into_par_iter()
        .map(|index| {
            let table: Vec<u8> = (0..states)
                .map(|s| ((index / universe_tables.pow(s as u32)) % universe_tables) as u8)
                .collect();
            let front = frontier_for_table(&table, &key_sets);
            (table, front)
        })
        .collect();

    // first table in enumeration order wins among equal error pairs
    let mut best: Vec<(Partial, Vec<u8>)> = Vec::new();
    for (table, front) in per_table {
        for cand in front {
            let dominated = best
                .iter()
                .any(|(b, _)| b.misses <= cand.misses && b.false_hits <= cand.false_hits);
            if !dominated {
                best.retain(|(b, _)| !(cand.misses <= b.misses && cand.false_hits <= b.false_hits));
                best.push((cand, table.clone()));
            }
        }
    }
    best.sort_by_key(|(b, _)| b.misses);

    let sets = key_sets.len() as u64;
    let key_slots = spec.n as u64 * sets;
    let nonkey_slots = (spec.u - spec.n) as u64 * sets;
    Ok(best
        .into_iter()
        .map(|(b, table)| TinyTester {
            eps_k: Ratio::new(b.misses, key_slots),
            eps_n: Ratio::new(b.false_hits, nonkey_slots),
            init: b.init,
            query: table,
        })
        .collect())
}

/// Outcome of comparing a tester's memory with the finite-`n` lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `F_p` of the tester's output laws, `p = n/u`.
    pub fp_value: f64,
    /// `max(0, n·F_p - log2(8n)/2)`.
    pub bound_bits: f64,
    pub memory_bits: u32,
    pub holds: bool,
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Checks `memory_bits ≥ memory_lower_bound(n, F_p(μ_K, μ_N))` for the
/// tester's exact output laws `μ_K = Bern(1 - ε_K)`, `μ_N = Bern(ε_N)`.
pub fn check_lower_bound(spec: &TinyTesterSpec, tester: &TinyTester) -> Result<BoundCheck> {
    let p = spec.n as f64 / spec.u as f64;
    let mu_k = DiscreteDistribution::bernoulli(1.0 - ratio_f64(tester.eps_k))?;
    let mu_n = DiscreteDistribution::bernoulli(ratio_f64(tester.eps_n))?;
    let fp_value = f_p(p, &mu_k, &mu_n)?;
    let bound_bits = memory_lower_bound(spec.n as u64, fp_value)?;
    Ok(BoundCheck { fp_value, bound_bits, memory_bits: spec.memory_bits, holds: spec.memory_bits as f64 >= bound_bits })
}
