//! Hash-based two-sided filter over a prime field.
//!
//! Every element `i` hashes to a row `h(i) ∈ F_q^m`. The stored state is one
//! nonzero vector `y`, and a query accepts `i` iff `⟨h(i), y⟩ = 0`. For any
//! fixed `y ≠ 0` a fresh row is accepted with probability exactly `1/q`, so
//! the false-positive rate is `ε_N = 1/q`. Build picks `y` so that at least
//! `⌈(1 - ε_K) n⌉` keys are accepted.

use std::collections::HashSet;
use std::io::BufRead;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::galois::{self, dot_unchecked, keyed_stream, nullspace_vector, FieldError, FieldVector, HashRows, PrimeField};
use crate::rate_distortion::{optimal_binary, RateError};

/// File magic of a serialized filter.
pub const MAGIC: [u8; 4] = *b"MRDF";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;
/// Cap on the default two-sided search budget.
pub const MAX_SEARCH_BUDGET: u64 = 10_000_000;
/// Candidate spaces up to this size are scanned as a seeded permutation.
pub const EXHAUSTIVE_SCAN_LIMIT: u64 = 1 << 20;
/// Two-sided normal quantile for 99% intervals.
pub const Z_99: f64 = 2.5758293035489;

const CANDIDATE_DOMAIN: u64 = 0x6361_6e64_6964_6174; // "candidat"
const SAMPLER_DOMAIN: u64 = 0x6e6f_6e6b_6579_7321; // "nonkeys!"
const SCAN_CHUNK: u64 = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("eps_N = {0} is not 1/q for a prime q")]
    NotReciprocalPrime(f64),
    #[error("eps_K = {0} must be a rational in [0, 1) with denominator below 2^16")]
    InvalidEpsK(f64),
    #[error("trivial regime: eps_K + eps_N >= 1")]
    TrivialRegime,
    #[error("n = {0} is too large for the serialized format")]
    TooManyKeys(u64),
    #[error("expected {expected} keys, got {got}")]
    KeyCountMismatch { expected: u64, got: usize },
    #[error("duplicate key at position {0}")]
    DuplicateKey(usize),
    #[error("search budget exhausted after {} candidates, best found satisfies {} keys", .0.candidates_tried, .0.satisfied_keys)]
    SearchExhausted(BuildReport),
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u16),
    #[error("truncated input: need {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("number of trials must be at least 1")]
    NoTrials,
    #[error("identifier space of {0} bytes is too small to avoid the keys")]
    SamplerSpace(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Rate(#[from] RateError),
}

pub type Result<T> = std::result::Result<T, FilterError>;

/// Sizing of a filter for `n` keys at target rates `(ε_K, 1/q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterParams {
    pub n: u64,
    /// `eps_k_num / eps_k_den`.
    pub eps_k: f64,
    pub eps_k_num: u16,
    pub eps_k_den: u16,
    pub eps_n: f64,
    pub q: u64,
    pub m: usize,
    /// Slack `n^{2/3}` in bits.
    pub t_n: f64,
    /// `KL(Bern(1 - ε_K) ‖ Bern(ε_N))` in bits.
    pub d: f64,
    pub seed: u64,
    pub search_budget: u64,
}

/// Smallest-denominator fraction within `1e-12` of `x`.
fn rationalize(x: f64) -> Option<(u16, u16)> {
    (1..=u16::MAX).find_map(|den| {
        let num = (x * den as f64).round();
        ((num / den as f64 - x).abs() < 1e-12 && num <= u16::MAX as f64).then_some((num as u16, den))
    })
}

fn reciprocal_prime(eps_n: f64) -> Result<PrimeField> {
    if !(eps_n.is_finite() && eps_n > 0.0 && eps_n <= 0.5) {
        return Err(FilterError::NotReciprocalPrime(eps_n));
    }
    let q = (1.0 / eps_n).round();
    if q >= (1u64 << 32) as f64 || (1.0 / q - eps_n).abs() > 1e-12 * eps_n.max(1e-300) + 1e-15 {
        return Err(FilterError::NotReciprocalPrime(eps_n));
    }
    PrimeField::new(q as u64).map_err(|_| FilterError::NotReciprocalPrime(eps_n))
}

/// `⌈x⌉`, treating values within float noise of an integer as that integer.
fn ceil_with_guard(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        x.ceil()
    }
}

/// Default number of two-sided candidates: `min(q^m - 1, 10^7)`.
fn default_budget(q: u64, m: usize) -> u64 {
    let mut total: u64 = 1;
    for _ in 0..m {
        total = total.saturating_mul(q);
        if total > MAX_SEARCH_BUDGET {
            return MAX_SEARCH_BUDGET;
        }
    }
    total - 1
}

/// Sizes a filter: `q = 1/ε_N`, `t_n = n^{2/3}`, `m = ⌈(n·D + t_n) / log2 q⌉`.
///
/// `n = 0` is accepted and yields `m = 1`.
pub fn derive_params(n: u64, eps_k: f64, eps_n: f64, seed: u64) -> Result<FilterParams> {
    if n > u32::MAX as u64 {
        return Err(FilterError::TooManyKeys(n));
    }
    if !(eps_k.is_finite() && (0.0..1.0).contains(&eps_k)) {
        return Err(FilterError::InvalidEpsK(eps_k));
    }
    let (eps_k_num, eps_k_den) = rationalize(eps_k).ok_or(FilterError::InvalidEpsK(eps_k))?;
    let field = reciprocal_prime(eps_n)?;
    let q = field.order();
    let eps_k = eps_k_num as f64 / eps_k_den as f64;
    let eps_n = 1.0 / q as f64;
    let d = match optimal_binary(eps_k, eps_n) {
        Ok(opt) => opt.rate,
        Err(RateError::TrivialRegime { .. }) => return Err(FilterError::TrivialRegime),
        Err(e) => return Err(e.into()),
    };
    let t_n = (n as f64).powf(2.0 / 3.0);
    let m = ceil_with_guard((n as f64 * d + t_n) / field.bits_per_element()).max(1.0) as usize;
    Ok(FilterParams {
        n,
        eps_k,
        eps_k_num,
        eps_k_den,
        eps_n,
        q,
        m,
        t_n,
        d,
        seed,
        search_budget: default_budget(q, m),
    })
}

impl FilterParams {
    pub fn field(&self) -> PrimeField {
        PrimeField::new(self.q).expect("q validated at construction")
    }

    /// `⌈(1 - ε_K) n⌉`, in exact integer arithmetic.
    pub fn required_hits(&self) -> u64 {
        let den = self.eps_k_den as u64;
        ((den - self.eps_k_num as u64) * self.n).div_ceil(den)
    }

    /// `⌈m log2 q⌉`, the bit length of `q^m - 1`.
    pub fn bits_payload(&self) -> u64 {
        (BigUint::from(self.q).pow(self.m as u32) - 1u32).bits()
    }

    pub fn payload_bytes(&self) -> usize {
        self.bits_payload().div_ceil(8) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub satisfied_keys: u64,
    pub candidates_tried: u64,
    pub bits_payload: u64,
    pub success: bool,
}

/// A built filter: the parameters and the stored vector `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    params: FilterParams,
    y: FieldVector,
}

impl FilterState {
    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn y(&self) -> &FieldVector {
        &self.y
    }

    fn hash(&self) -> HashRows {
        HashRows::new(self.params.seed, self.params.field())
    }

    /// Accepts `element` iff `⟨h(element), y⟩ = 0`.
    pub fn contains(&self, element: &[u8]) -> bool {
        let row = self.hash().row_coords(element, self.params.m);
        dot_unchecked(self.params.field(), &row, self.y.coords()) == 0
    }
}

/// Answer of the filter as a score in `{0, 1}`.
pub fn query(state: &FilterState, element: &[u8]) -> u8 {
    state.contains(element) as u8
}

fn count_hits(field: PrimeField, rows: &[Vec<u64>], y: &[u64], required: u64) -> u64 {
    let allowed_misses = rows.len() as u64 - required.min(rows.len() as u64);
    let mut hits = 0;
    let mut misses = 0;
    for row in rows {
        if dot_unchecked(field, row, y) == 0 {
            hits += 1;
        } else {
            misses += 1;
            if misses > allowed_misses {
                break;
            }
        }
    }
    hits
}

/// Base-`q` digits of `index`, coordinate 0 least significant.
fn digits(mut index: u64, q: u64, m: usize) -> Vec<u64> {
    (0..m)
        .map(|_| {
            let d = index % q;
            index /= q;
            d
        })
        .collect()
}

/// Deterministic sequence of nonzero candidate vectors.
enum Candidates {
    /// Seeded permutation of all `q^m - 1` nonzero vectors, by index.
    Permutation(Vec<u64>),
    /// Independent seeded draws, one stream per candidate index.
    Random,
}

impl Candidates {
    fn new(params: &FilterParams) -> Self {
        let total = default_budget(params.q, params.m);
        if total <= EXHAUSTIVE_SCAN_LIMIT {
            let mut order: Vec<u64> = (1..=total).collect();
            order.shuffle(&mut keyed_stream(params.seed, CANDIDATE_DOMAIN, b"permutation"));
            Candidates::Permutation(order)
        } else {
            Candidates::Random
        }
    }

    fn get(&self, params: &FilterParams, index: u64) -> Vec<u64> {
        match self {
            Candidates::Permutation(order) => digits(order[index as usize], params.q, params.m),
            Candidates::Random => {
                let field = params.field();
                let mut stream = keyed_stream(params.seed, CANDIDATE_DOMAIN, &index.to_le_bytes());
                loop {
                    let v: Vec<u64> = (0..params.m).map(|_| galois::sample_field_element(&mut stream, field)).collect();
                    if v.iter().any(|&c| c != 0) {
                        return v;
                    }
                }
            }
        }
    }

    fn len(&self, budget: u64) -> u64 {
        match self {
            Candidates::Permutation(order) => budget.min(order.len() as u64),
            Candidates::Random => budget,
        }
    }
}

/// Builds a filter for exactly `params.n` distinct keys.
///
/// With `ε_K = 0` the stored vector is the canonical nullspace vector of the
/// key rows. Otherwise candidates are scanned in a seeded order and the first
/// one accepting at least [`FilterParams::required_hits`] keys wins; the scan
/// runs in parallel chunks but always returns the lowest-index success.
pub fn build<K: AsRef<[u8]> + Sync>(params: &FilterParams, keys: &[K]) -> Result<(FilterState, BuildReport)> {
    if keys.len() as u64 != params.n {
        return Err(FilterError::KeyCountMismatch { expected: params.n, got: keys.len() });
    }
    let mut seen = HashSet::with_capacity(keys.len());
    for (i, key) in keys.iter().enumerate() {
        if !seen.insert(key.as_ref()) {
            return Err(FilterError::DuplicateKey(i));
        }
    }
    let field = params.field();
    let hash = HashRows::new(params.seed, field);
    let rows: Vec<Vec<u64>> = keys.par_iter().map(|k| hash.row_coords(k.as_ref(), params.m)).collect();
    let required = params.required_hits();
    let bits_payload = params.bits_payload();

    if params.eps_k_num == 0 {
        let vectors: Vec<FieldVector> = rows.iter().map(|r| FieldVector::new(field, r.clone())).collect();
        let y = nullspace_vector(field, &vectors, params.m)?;
        let Some(y) = y else {
            let report = BuildReport { satisfied_keys: 0, candidates_tried: 1, bits_payload, success: false };
            return Err(FilterError::SearchExhausted(report));
        };
        let satisfied_keys = count_hits(field, &rows, y.coords(), params.n);
        let report = BuildReport { satisfied_keys, candidates_tried: 1, bits_payload, success: true };
        return Ok((FilterState { params: params.clone(), y }, report));
    }

    let candidates = Candidates::new(params);
    let budget = candidates.len(params.search_budget);
    let mut start = 0;
    let mut best = 0;
    while start < budget {
        let end = (start + SCAN_CHUNK).min(budget);
        let hits: Vec<u64> = (start..end)
            .into_par_iter()
            .map(|i| count_hits(field, &rows, &candidates.get(params, i), required))
            .collect();
        if let Some(offset) = hits.iter().position(|&h| h >= required) {
            let index = start + offset as u64;
            let y = FieldVector::new(field, candidates.get(params, index));
            let satisfied_keys = rows.iter().filter(|r| dot_unchecked(field, r, y.coords()) == 0).count() as u64;
            let report = BuildReport { satisfied_keys, candidates_tried: index + 1, bits_payload, success: true };
            return Ok((FilterState { params: params.clone(), y }, report));
        }
        best = best.max(hits.into_iter().max().unwrap_or(0));
        start = end;
    }
    Err(FilterError::SearchExhausted(BuildReport {
        satisfied_keys: best,
        candidates_tried: budget,
        bits_payload,
        success: false,
    }))
}

/// Writes the 32-byte header followed by the base-`q` packing of `y`.
///
/// Header layout, little-endian: magic (4), version u16, ε_K numerator u16,
/// ε_K denominator u16, reserved u16, q u32, m u32, n u32, seed u64.
pub fn serialize(state: &FilterState) -> Vec<u8> {
    let p = &state.params;
    let mut out = Vec::with_capacity(HEADER_LEN + p.payload_bytes());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&p.eps_k_num.to_le_bytes());
    out.extend_from_slice(&p.eps_k_den.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(p.q as u32).to_le_bytes());
    out.extend_from_slice(&(p.m as u32).to_le_bytes());
    out.extend_from_slice(&(p.n as u32).to_le_bytes());
    out.extend_from_slice(&p.seed.to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);

    let mut value = BigUint::zero();
    for &c in state.y.coords().iter().rev() {
        value = value * p.q + c;
    }
    let mut payload = value.to_bytes_le();
    payload.resize(p.payload_bytes(), 0);
    out.extend_from_slice(&payload);
    out
}

fn read_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes(bytes[at..at + 2].try_into().unwrap())
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

/// Inverse of [`serialize`].
pub fn deserialize(bytes: &[u8]) -> Result<FilterState> {
    if bytes.len() < HEADER_LEN {
        return Err(FilterError::Truncated { expected: HEADER_LEN, got: bytes.len() });
    }
    if bytes[..4] != MAGIC {
        return Err(FilterError::BadMagic);
    }
    let version = read_u16(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(FilterError::BadVersion(version));
    }
    let malformed = |msg: &str| FilterError::MalformedHeader(msg.to_string());
    let (num, den) = (read_u16(bytes, 6), read_u16(bytes, 8));
    if den == 0 || num >= den {
        return Err(malformed("eps_K fraction out of range"));
    }
    if read_u16(bytes, 10) != 0 {
        return Err(malformed("reserved field is nonzero"));
    }
    let q = read_u32(bytes, 12) as u64;
    let m = read_u32(bytes, 16) as usize;
    let n = read_u32(bytes, 20) as u64;
    let seed = u64::from_le_bytes(bytes[24..32].try_into().unwrap());
    if !galois::is_prime(q) {
        return Err(malformed("q is not prime"));
    }
    let params = derive_params(n, num as f64 / den as f64, 1.0 / q as f64, seed)?;
    if params.m != m || params.eps_k_num != num || params.eps_k_den != den {
        return Err(malformed("m or eps_K inconsistent with the sizing rule"));
    }
    let expected = HEADER_LEN + params.payload_bytes();
    if bytes.len() < expected {
        return Err(FilterError::Truncated { expected, got: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(FilterError::TrailingBytes(bytes.len() - expected));
    }
    let mut value = BigUint::from_bytes_le(&bytes[HEADER_LEN..]);
    if value >= BigUint::from(q).pow(m as u32) {
        return Err(malformed("payload exceeds q^m"));
    }
    let mut coords = Vec::with_capacity(m);
    for _ in 0..m {
        coords.push((&value % q).to_u64().expect("digit below q"));
        value /= q;
    }
    let y = FieldVector::new(params.field(), coords);
    if y.is_zero() {
        return Err(malformed("stored vector is zero"));
    }
    Ok(FilterState { params, y })
}

/// Anything that answers membership queries.
pub trait MembershipTester {
    fn accepts(&self, element: &[u8]) -> bool;
}

impl MembershipTester for FilterState {
    fn accepts(&self, element: &[u8]) -> bool {
        self.contains(element)
    }
}

impl<F: Fn(&[u8]) -> bool> MembershipTester for F {
    fn accepts(&self, element: &[u8]) -> bool {
        self(element)
    }
}

/// Source of non-key identifiers.
pub trait NonKeySampler {
    fn sample(&mut self) -> Vec<u8>;
}

/// Uniform random identifiers of a fixed length that never collide with the
/// key set.
pub struct RandomIdSampler {
    stream: rand_chacha::ChaCha8Rng,
    id_len: usize,
    keys: HashSet<Vec<u8>>,
}

impl RandomIdSampler {
    pub fn new<K: AsRef<[u8]>>(seed: u64, id_len: usize, keys: &[K]) -> Result<Self> {
        let keys: HashSet<Vec<u8>> = keys.iter().map(|k| k.as_ref().to_vec()).collect();
        let same_len = keys.iter().filter(|k| k.len() == id_len).count() as f64;
        // at least half of the identifier space must be free of keys
        if id_len == 0 || (id_len < 8 && 2.0 * same_len >= 256f64.powi(id_len as i32)) {
            return Err(FilterError::SamplerSpace(id_len));
        }
        let stream = keyed_stream(seed, SAMPLER_DOMAIN, &(id_len as u64).to_le_bytes());
        Ok(Self { stream, id_len, keys })
    }
}

impl NonKeySampler for RandomIdSampler {
    fn sample(&mut self) -> Vec<u8> {
        let mut id = vec![0; self.id_len];
        loop {
            self.stream.fill_bytes(&mut id);
            if !self.keys.contains(&id) {
                return id;
            }
        }
    }
}

/// Empirical error rates with 99% Wilson intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateEstimate {
    pub fnr_hat: f64,
    pub fnr_ci: (f64, f64),
    pub fpr_hat: f64,
    pub fpr_ci: (f64, f64),
    pub keys: u64,
    pub trials: u64,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let center = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// FNR over `keys` and FPR over `trials` sampled non-keys.
pub fn measure_rates<T, K, S>(tester: &T, keys: &[K], sampler: &mut S, trials: u64) -> Result<RateEstimate>
where
    T: MembershipTester + Sync + ?Sized,
    K: AsRef<[u8]> + Sync,
    S: NonKeySampler + ?Sized,
{
    if trials == 0 {
        return Err(FilterError::NoTrials);
    }
    let misses = keys.par_iter().filter(|k| !tester.accepts(k.as_ref())).count() as u64;
    let nonkeys: Vec<Vec<u8>> = (0..trials).map(|_| sampler.sample()).collect();
    let false_hits = nonkeys.par_iter().filter(|e| tester.accepts(e)).count() as u64;
    let n_keys = keys.len() as u64;
    let fnr_hat = if n_keys == 0 { 0.0 } else { misses as f64 / n_keys as f64 };
    Ok(RateEstimate {
        fnr_hat,
        fnr_ci: wilson_interval(misses, n_keys, Z_99),
        fpr_hat: false_hits as f64 / trials as f64,
        fpr_ci: wilson_interval(false_hits, trials, Z_99),
        keys: n_keys,
        trials,
    })
}

/// One key per line; the line's bytes, without the terminator, are the key.
///
/// A trailing `\r` is stripped so CRLF files name the same keys.
pub fn read_keys<R: BufRead>(reader: R) -> std::io::Result<Vec<Vec<u8>>> {
    reader
        .split(b'\n')
        .map(|line| {
            line.map(|mut l| {
                if l.last() == Some(&b'\r') {
                    l.pop();
                }
                l
            })
        })
        .collect()
}
