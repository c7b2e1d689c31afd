//! Rate-distortion theory of membership testing.
//!
//! A membership tester stores a key set and answers every query with a score
//! in `[0, 1]`. This crate computes how many bits per key such a tester needs
//! for given error budgets on keys and non-keys, and ships a hash-based
//! two-sided filter over a prime field that meets the bound.
//!
//! - [`measures`]: finite score distributions, KL / χ² / entropy, `F_p`.
//! - [`rate_distortion`]: error metrics, `R_p` solver, closed-form optima,
//!   finite-`n` bounds.
//! - [`galois`]: prime-field arithmetic and the seeded hash rows.
//! - [`filter`]: the two-sided filter: sizing, build, query, serialization,
//!   empirical rate measurement.
//! - [`bruteforce`]: exhaustive oracles at tiny sizes.
//! - [`cli`]: the `membership-rd` command line.

pub mod bruteforce;
pub mod cli;
pub mod filter;
pub mod galois;
pub mod measures;
pub mod rate_distortion;
