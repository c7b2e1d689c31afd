//! Finite-support probability measures on `[0, 1]` and the information
//! functionals built on them.
//!
//! Every score distribution in this crate (key scores, non-key scores, the
//! query-averaged mixture) is a [`DiscreteDistribution`]: a short, sorted list
//! of atoms. Divergences are computed exactly over the atom lists, so there is
//! no quadrature error anywhere.
//!
//! Units: divergences, entropies and [`f_p`] are in **bits**.

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two atom locations closer than this are the same location.
pub const LOCATION_TOLERANCE: f64 = 1e-12;

/// Bin count used by [`estimate_from_samples`] when the caller has no opinion.
pub const DEFAULT_BINS: usize = 50;

const MASS_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("atom location {0} is outside [0, 1]")]
    LocationOutOfRange(f64),
    #[error("atom mass {0} is negative or not finite")]
    InvalidMass(f64),
    #[error("masses sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("distribution has no atoms with positive mass")]
    Empty,
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("mixing weight p = {0} must lie strictly between 0 and 1")]
    MixingWeight(f64),
    #[error("score {value} at position {index} is outside [0, 1]")]
    ScoreOutOfRange { index: usize, value: f64 },
    #[error("no samples given")]
    NoSamples,
    #[error("histogram needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("histograms have different bin counts: {0} vs {1}")]
    BinMismatch(usize, usize),
    #[error("line {line}: cannot parse score {text:?}")]
    Parse { line: usize, text: String },
    #[error("reading scores: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// One point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A probability measure on `[0, 1]` with finitely many atoms.
///
/// Canonical form: locations strictly increasing, masses strictly positive and
/// summing to one. Construction sorts, merges locations within
/// [`LOCATION_TOLERANCE`], drops zero masses and renormalizes away rounding
/// noise; inputs whose masses are off by more than `1e-9` are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<Atom>,
}

impl DiscreteDistribution {
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw = Vec::new();
        for (location, mass) in atoms {
            if !location.is_finite() || !(0.0..=1.0).contains(&location) {
                return Err(MeasureError::LocationOutOfRange(location));
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(MeasureError::InvalidMass(mass));
            }
            if mass > 0.0 {
                raw.push(Atom { location, mass });
            }
        }
        if raw.is_empty() {
            return Err(MeasureError::Empty);
        }
        raw.sort_by(|a, b| a.location.total_cmp(&b.location));

        let mut merged: Vec<Atom> = Vec::with_capacity(raw.len());
        for atom in raw {
            match merged.last_mut() {
                Some(last) if atom.location - last.location < LOCATION_TOLERANCE => {
                    last.mass += atom.mass;
                }
                _ => merged.push(atom),
            }
        }

        let total: f64 = merged.iter().map(|a| a.mass).sum();
        if (total - 1.0).abs() > MASS_SUM_SLACK {
            return Err(MeasureError::NotNormalized(total));
        }
        for atom in &mut merged {
            atom.mass /= total;
        }
        Ok(Self { atoms: merged })
    }

    /// Same as [`new`](Self::new) but rescales arbitrary nonnegative weights.
    pub fn from_weights<I>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let pairs: Vec<(f64, f64)> = weights.into_iter().collect();
        let mut total = 0.0;
        for &(_, w) in &pairs {
            if !w.is_finite() || w < 0.0 {
                return Err(MeasureError::InvalidMass(w));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(MeasureError::Empty);
        }
        Self::new(pairs.into_iter().map(|(x, w)| (x, w / total)))
    }

    /// The point mass `δ_x`.
    pub fn point(location: f64) -> Result<Self> {
        Self::new([(location, 1.0)])
    }

    /// `Bern(b)`: mass `b` at 1 and `1 - b` at 0.
    pub fn bernoulli(b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) {
            return Err(MeasureError::ProbabilityOutOfRange(b));
        }
        Self::new([(0.0, 1.0 - b), (1.0, b)])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Mass placed at `location` (zero when there is no atom there).
    pub fn mass_at(&self, location: f64) -> f64 {
        self.atoms
            .iter()
            .find(|a| (a.location - location).abs() < LOCATION_TOLERANCE)
            .map_or(0.0, |a| a.mass)
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    /// `E[f(X)]`. Atoms where `f` is infinite make the result infinite.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|a| a.mass * f(a.location)).sum()
    }

    /// `weight·self + (1 - weight)·other`.
    pub fn mix(&self, weight: f64, other: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(MeasureError::ProbabilityOutOfRange(weight));
        }
        let left = self.atoms.iter().map(|a| (a.location, weight * a.mass));
        let right = other.atoms.iter().map(|a| (a.location, (1.0 - weight) * a.mass));
        Self::new(left.chain(right))
    }

    /// Atom list as `[location, mass]` pairs, the sidecar JSON layout.
    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.atoms.iter().map(|a| [a.location, a.mass]).collect()
    }
}

impl fmt::Display for DiscreteDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", a.location, a.mass)?;
        }
        write!(f, "}}")
    }
}

/// Serialized as `{"atoms": [[location, mass], ...]}`.
impl Serialize for DiscreteDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            atoms: Vec<[f64; 2]>,
        }
        Repr { atoms: self.to_pairs() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiscreteDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            atoms: Vec<[f64; 2]>,
        }
        let repr = Repr::deserialize(deserializer)?;
        Self::new(repr.atoms.into_iter().map(|[x, m]| (x, m))).map_err(serde::de::Error::custom)
    }
}

/// Walks two canonical atom lists in location order, yielding aligned masses.
fn aligned<'a>(
    p: &'a DiscreteDistribution,
    q: &'a DiscreteDistribution,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let (a, b) = (&p.atoms, &q.atoms);
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        if i < a.len() && j < b.len() {
            let d = a[i].location - b[j].location;
            if d.abs() < LOCATION_TOLERANCE {
                i += 1;
                j += 1;
                Some((a[i - 1].mass, b[j - 1].mass))
            } else if d < 0.0 {
                i += 1;
                Some((a[i - 1].mass, 0.0))
            } else {
                j += 1;
                Some((0.0, b[j - 1].mass))
            }
        } else if i < a.len() {
            i += 1;
            Some((a[i - 1].mass, 0.0))
        } else if j < b.len() {
            j += 1;
            Some((0.0, b[j - 1].mass))
        } else {
            None
        }
    })
}

fn kl_masses(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut total = 0.0;
    for (pm, qm) in pairs {
        if pm == 0.0 {
            continue;
        }
        if qm == 0.0 {
            return f64::INFINITY;
        }
        total += pm * (pm / qm).log2();
    }
    total.max(0.0)
}

/// `KL(P ‖ Q)` in bits; `+inf` when `P` has mass outside the support of `Q`.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    kl_masses(aligned(p, q))
}

/// Pearson `χ²(P ‖ Q) = Σ (P - Q)² / Q`; `+inf` unless `supp P ⊆ supp Q`.
pub fn chi_squared(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let mut total = 0.0;
    for (pm, qm) in aligned(p, q) {
        if qm == 0.0 {
            if pm > 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        total += (pm - qm) * (pm - qm) / qm;
    }
    total
}

/// `h(q) = -q log2 q - (1 - q) log2 (1 - q)`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(MeasureError::ProbabilityOutOfRange(q));
    }
    Ok(plogp(q) + plogp(1.0 - q))
}

fn plogp(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

fn check_mixing_weight(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(MeasureError::MixingWeight(p))
    }
}

/// The query-averaged score law `p·μ_K + (1 - p)·μ_N`.
pub fn mixture(p: f64, mu_k: &DiscreteDistribution, mu_n: &DiscreteDistribution) -> Result<DiscreteDistribution> {
    mu_k.mix(p, mu_n)
}

/// Per-key memory cost `F_p(μ_K, μ_N) = I(X; X̂) / p` in bits, where
/// `X ~ Bern(p)` marks keys and `X̂` is the score.
///
/// Evaluated through the mixture identity
/// `KL(μ_K ‖ μ_p) + (1 - p)/p · KL(μ_N ‖ μ_p)`, which is always finite for
/// `0 < p < 1` (bounded by `h(p)/p`).
pub fn f_p(p: f64, mu_k: &DiscreteDistribution, mu_n: &DiscreteDistribution) -> Result<f64> {
    check_mixing_weight(p)?;
    let mu_p = mixture(p, mu_k, mu_n)?;
    Ok(kl_divergence(mu_k, &mu_p) + (1.0 - p) / p * kl_divergence(mu_n, &mu_p))
}

/// `∂F_p/∂p = -KL(μ_N ‖ μ_p) / p²` (bits per unit `p`).
pub fn f_p_derivative(p: f64, mu_k: &DiscreteDistribution, mu_n: &DiscreteDistribution) -> Result<f64> {
    check_mixing_weight(p)?;
    let mu_p = mixture(p, mu_k, mu_n)?;
    Ok(-kl_divergence(mu_n, &mu_p) / (p * p))
}

/// Pushes scores through the kernel `T(1 | t) = t`, giving `Bern(mean)`.
pub fn binarize(mu: &DiscreteDistribution) -> DiscreteDistribution {
    let mean = mu.mean().clamp(0.0, 1.0);
    DiscreteDistribution::bernoulli(mean).expect("mean of a distribution on [0,1] is in [0,1]")
}

/// `W1(P, Q) = ∫₀¹ |F_P(t) - F_Q(t)| dt`, exact on the merged atom grid.
pub fn wasserstein1(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let mut events: Vec<(f64, f64)> = p
        .atoms
        .iter()
        .map(|a| (a.location, a.mass))
        .chain(q.atoms.iter().map(|a| (a.location, -a.mass)))
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut gap = 0.0;
    let mut total = 0.0;
    for window in 0..events.len() {
        gap += events[window].1;
        let next = events.get(window + 1).map_or(1.0, |e| e.0);
        total += gap.abs() * (next - events[window].0);
    }
    total
}

/// Equal-width histogram of scores over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedHistogram {
    bin_masses: Vec<f64>,
}

impl BinnedHistogram {
    pub fn from_masses(bin_masses: Vec<f64>) -> Result<Self> {
        if bin_masses.len() < 2 {
            return Err(MeasureError::TooFewBins(bin_masses.len()));
        }
        if let Some(&bad) = bin_masses.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(MeasureError::InvalidMass(bad));
        }
        let total: f64 = bin_masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(MeasureError::NotNormalized(total));
        }
        Ok(Self { bin_masses })
    }

    pub fn bin_count(&self) -> usize {
        self.bin_masses.len()
    }

    pub fn bin_masses(&self) -> &[f64] {
        &self.bin_masses
    }

    /// Bin holding score `x`; 1.0 goes to the last bin.
    pub fn bin_index(bin_count: usize, x: f64) -> usize {
        ((x * bin_count as f64).floor() as usize).min(bin_count - 1)
    }

    /// The histogram as atoms at bin centers.
    pub fn to_distribution(&self) -> DiscreteDistribution {
        let width = 1.0 / self.bin_count() as f64;
        DiscreteDistribution::new(
            self.bin_masses
                .iter()
                .enumerate()
                .map(|(i, &m)| ((i as f64 + 0.5) * width, m)),
        )
        .expect("normalized histogram")
    }
}

/// Builds a normalized equal-width histogram from scores in `[0, 1]`.
pub fn estimate_from_samples(scores: &[f64], bins: usize) -> Result<BinnedHistogram> {
    if bins < 2 {
        return Err(MeasureError::TooFewBins(bins));
    }
    if scores.is_empty() {
        return Err(MeasureError::NoSamples);
    }
    let mut counts = vec![0u64; bins];
    for (index, &value) in scores.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(MeasureError::ScoreOutOfRange { index, value });
        }
        counts[BinnedHistogram::bin_index(bins, value)] += 1;
    }
    let n = scores.len() as f64;
    let mut masses: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    // absorb the rounding residue so the masses sum to 1 within 1e-12
    let residue = 1.0 - masses.iter().sum::<f64>();
    if let Some(largest) = masses.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *largest += residue;
    }
    BinnedHistogram::from_masses(masses)
}

/// Raw-mass KL between two histograms in bits, no smoothing.
pub fn histogram_kl(p: &BinnedHistogram, q: &BinnedHistogram) -> Result<f64> {
    if p.bin_count() != q.bin_count() {
        return Err(MeasureError::BinMismatch(p.bin_count(), q.bin_count()));
    }
    Ok(kl_masses(p.bin_masses.iter().copied().zip(q.bin_masses.iter().copied())))
}

/// Reads a score-sample file: one decimal per line, `#` lines and blank lines
/// skipped, every value in `[0, 1]`.
pub fn read_scores<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut scores = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| MeasureError::Io(e.to_string()))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let value: f64 = text.parse().map_err(|_| MeasureError::Parse {
            line: i + 1,
            text: text.to_string(),
        })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(MeasureError::ScoreOutOfRange { index: scores.len(), value });
        }
        scores.push(value);
    }
    Ok(scores)
}
