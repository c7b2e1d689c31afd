//! Oracles shared by the integration tests.

use membership_rd::measures::{DiscreteDistribution, LOCATION_TOLERANCE};

pub fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

/// `I(X; X̂)/p` from the joint law of `X ~ Bern(p)` and the score.
pub fn mutual_information_rate(p: f64, mu_k: &DiscreteDistribution, mu_n: &DiscreteDistribution) -> f64 {
    let mut locations: Vec<f64> = mu_k.atoms().iter().chain(mu_n.atoms()).map(|a| a.location).collect();
    locations.sort_by(f64::total_cmp);
    locations.dedup_by(|a, b| (*a - *b).abs() < LOCATION_TOLERANCE);
    let conditional: f64 = locations
        .iter()
        .map(|&x| {
            let joint_key = p * mu_k.mass_at(x);
            let marginal = joint_key + (1.0 - p) * mu_n.mass_at(x);
            if marginal == 0.0 {
                0.0
            } else {
                marginal * h(joint_key / marginal)
            }
        })
        .sum();
    (h(p) - conditional) / p
}
