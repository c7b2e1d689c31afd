//! Prime-field arithmetic, linear algebra over `F_q`, and the seeded hash rows
//! that stand in for a random oracle.

use std::hash::Hasher;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use siphasher::sip128::{Hasher128, SipHasher24};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is a prime power; only prime fields are supported")]
    PrimePower(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field order {0} is too large (must be below 2^32)")]
    TooLarge(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("vectors live in different fields: F_{0} vs F_{1}")]
    FieldMismatch(u64, u64),
}

pub type Result<T> = std::result::Result<T, FieldError>;

/// `F_q` for a prime `q < 2^32`; products of two elements fit in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

fn smallest_factor(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 2;
    }
    n
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && smallest_factor(n) == n
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        if q >= 1 << 32 {
            return Err(FieldError::TooLarge(q));
        }
        if q < 2 {
            return Err(FieldError::NotPrime(q));
        }
        let f = smallest_factor(q);
        if f == q {
            return Ok(Self { q });
        }
        let mut rest = q;
        while rest.is_multiple_of(f) {
            rest /= f;
        }
        if rest == 1 {
            Err(FieldError::PrimePower(q))
        } else {
            Err(FieldError::NotPrime(q))
        }
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    /// `log2 q`, the information content of one element.
    pub fn bits_per_element(&self) -> f64 {
        (self.q as f64).log2()
    }

    pub fn reduce(&self, a: u64) -> u64 {
        a % self.q
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b) % self.q
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a) % self.q
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        inv(*self, a)
    }
}

/// Multiplicative inverse by Fermat: `a^{q-2}`.
pub fn inv(field: PrimeField, a: u64) -> Result<u64> {
    let a = field.reduce(a);
    if a == 0 {
        return Err(FieldError::ZeroInverse);
    }
    Ok(field.pow(a, field.q - 2))
}

/// A vector in `F_q^m` with reduced coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldVector {
    field: PrimeField,
    coords: Vec<u64>,
}

impl FieldVector {
    /// Reduces every coordinate mod `q`.
    pub fn new(field: PrimeField, coords: Vec<u64>) -> Self {
        let coords = coords.into_iter().map(|c| field.reduce(c)).collect();
        Self { field, coords }
    }

    pub fn zero(field: PrimeField, m: usize) -> Self {
        Self { field, coords: vec![0; m] }
    }

    /// The `i`-th standard basis vector.
    pub fn basis(field: PrimeField, m: usize, i: usize) -> Self {
        let mut v = Self::zero(field, m);
        v.coords[i] = 1;
        v
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }
}

/// `Σ x_j y_j mod q`.
pub fn dot(x: &FieldVector, y: &FieldVector) -> Result<u64> {
    if x.field != y.field {
        return Err(FieldError::FieldMismatch(x.field.q, y.field.q));
    }
    if x.len() != y.len() {
        return Err(FieldError::LengthMismatch(x.len(), y.len()));
    }
    Ok(dot_unchecked(x.field, &x.coords, &y.coords))
}

pub(crate) fn dot_unchecked(field: PrimeField, x: &[u64], y: &[u64]) -> u64 {
    let q = field.q;
    if q == 2 {
        return x.iter().zip(y).fold(0, |acc, (a, b)| acc ^ (a & b));
    }
    // each product is below 2^64 / 2^32; reduce once it could overflow
    let mut acc: u64 = 0;
    for (a, b) in x.iter().zip(y) {
        acc += a * b;
        if acc >= 1 << 63 {
            acc %= q;
        }
    }
    acc % q
}

/// A nonzero `y` with `⟨row, y⟩ = 0` for every row, or `None` when the rows
/// have full column rank `m`.
///
/// Deterministic: the rows are brought to reduced row-echelon form, the
/// lowest-index free variable is set to 1 and all other free variables to 0.
pub fn nullspace_vector(field: PrimeField, rows: &[FieldVector], m: usize) -> Result<Option<FieldVector>> {
    for row in rows {
        if row.field != field {
            return Err(FieldError::FieldMismatch(field.q, row.field.q));
        }
        if row.len() != m {
            return Err(FieldError::LengthMismatch(row.len(), m));
        }
    }
    if m == 0 {
        return Ok(None);
    }
    let (pivots, free_column_values) = if field.q == 2 {
        rref_binary(rows, m)
    } else {
        rref_prime(field, rows, m)
    };
    let Some(free) = (0..m).find(|c| !pivots.iter().any(|(pc, _)| pc == c)) else {
        return Ok(None);
    };
    let mut y = vec![0; m];
    y[free] = 1;
    for (i, &(pivot_col, _)) in pivots.iter().enumerate() {
        // pivot row reads y_pivot + Σ_free M[i][f] y_f = 0
        y[pivot_col] = field.neg(free_column_values(i, free));
    }
    Ok(Some(FieldVector { field, coords: y }))
}

type PivotInfo = Vec<(usize, usize)>;
type Lookup = Box<dyn Fn(usize, usize) -> u64>;

fn rref_prime(field: PrimeField, rows: &[FieldVector], m: usize) -> (PivotInfo, Lookup) {
    let mut mat: Vec<Vec<u64>> = rows.iter().map(|r| r.coords.clone()).collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..m {
        let Some(found) = (rank..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(rank, found);
        let scale = field.inv(mat[rank][col]).expect("pivot is nonzero");
        for v in &mut mat[rank][col..] {
            *v = field.mul(*v, scale);
        }
        let pivot_row = mat[rank].clone();
        for (r, row) in mat.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (v, &pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v = field.sub(*v, field.mul(factor, pv));
            }
        }
        pivots.push((col, rank));
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    mat.truncate(rank);
    (pivots, Box::new(move |i, c| mat[i][c]))
}

/// Gaussian elimination over `F_2` on bit-packed rows.
fn rref_binary(rows: &[FieldVector], m: usize) -> (PivotInfo, Lookup) {
    let words = m.div_ceil(64);
    let mut mat: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            let mut packed = vec![0u64; words];
            for (j, &c) in r.coords.iter().enumerate() {
                packed[j / 64] |= c << (j % 64);
            }
            packed
        })
        .collect();
    let bit = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1;
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..m {
        let Some(found) = (rank..mat.len()).find(|&r| bit(&mat[r], col) == 1) else {
            continue;
        };
        mat.swap(rank, found);
        let pivot_row = mat[rank].clone();
        let first_word = col / 64;
        for (r, row) in mat.iter_mut().enumerate() {
            if r != rank && bit(row, col) == 1 {
                for (w, pw) in row[first_word..].iter_mut().zip(&pivot_row[first_word..]) {
                    *w ^= pw;
                }
            }
        }
        pivots.push((col, rank));
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    mat.truncate(rank);
    (pivots, Box::new(move |i, c| (mat[i][c / 64] >> (c % 64)) & 1))
}

/// Words at or above this value are rejected when sampling `F_q`:
/// `q·⌊2^64/q⌋`.
pub fn acceptance_threshold(field: PrimeField) -> u128 {
    let q = field.q as u128;
    q * ((1u128 << 64) / q)
}

/// Uniform element of `F_q` from a 64-bit word stream by rejection.
pub fn sample_field_element<R: RngCore + ?Sized>(stream: &mut R, field: PrimeField) -> u64 {
    let threshold = acceptance_threshold(field);
    loop {
        let w = stream.next_u64();
        if (w as u128) < threshold {
            return w % field.q;
        }
    }
}

const ROW_DOMAIN: u64 = 0x726f_775f_6861_7368; // "row_hash"

/// Derives a ChaCha stream keyed by `(seed, domain, id)`.
pub(crate) fn keyed_stream(seed: u64, domain: u64, id: &[u8]) -> ChaCha8Rng {
    let mut sip = SipHasher24::new_with_keys(seed, domain);
    sip.write(id);
    let digest = sip.finish128();
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&digest.h1.to_le_bytes());
    key[8..16].copy_from_slice(&digest.h2.to_le_bytes());
    key[16..24].copy_from_slice(&seed.to_le_bytes());
    key[24..].copy_from_slice(&domain.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Seeded hash `h: bytes → F_q^m`.
///
/// Each element identifier gets its own pseudorandom stream keyed by the seed
/// and the identifier bytes; coordinate `j` is the `j`-th accepted draw. The
/// map `(id, j) → element` is a pure function of the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashRows {
    seed: u64,
    field: PrimeField,
}

impl HashRows {
    pub fn new(seed: u64, field: PrimeField) -> Self {
        Self { seed, field }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub(crate) fn row_coords(&self, id: &[u8], m: usize) -> Vec<u64> {
        let mut stream = keyed_stream(self.seed, ROW_DOMAIN, id);
        (0..m).map(|_| sample_field_element(&mut stream, self.field)).collect()
    }

    pub fn row(&self, id: &[u8], m: usize) -> FieldVector {
        FieldVector { field: self.field, coords: self.row_coords(id, m) }
    }

    pub fn coordinate(&self, id: &[u8], index: usize) -> u64 {
        let mut stream = keyed_stream(self.seed, ROW_DOMAIN, id);
        let mut value = 0;
        for _ in 0..=index {
            value = sample_field_element(&mut stream, self.field);
        }
        value
    }
}
