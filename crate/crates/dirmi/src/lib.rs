//! Closed-form uncertainty decomposition for Dirichlet predictive
//! distributions, with the estimation and active-learning plumbing needed to
//! use it on Monte Carlo dropout classifiers.
//!
//! The core result implemented here: when the class-probability vector of a
//! Bayesian classifier is modeled as Dirichlet(alpha), the mutual information
//! between the label and the parameters (epistemic uncertainty, the BALD
//! acquisition score) has a closed form in digamma functions, as does the
//! aleatoric remainder. No posterior sampling is needed once alpha is known.
//!
//! Module map:
//!
//! - [`specfun`]: log-gamma, digamma, inverse digamma, log multivariate Beta
//! - [`dirichlet`]: validated parameters, density, entropy, moments, sampling
//! - [`uncertainty`]: the closed-form decomposition and its Monte Carlo
//!   counterparts (BALD, BABA, marginal joint entropy)
//! - [`estimation`]: moment initialization plus digamma fixed-point iteration
//!   to fit alpha from sampled probability vectors
//! - [`model`]: a small from-scratch MLP with MC dropout
//! - [`data`]: IDX image files, synthetic blobs, learning-curve CSV files
//! - [`active`]: pool-based active learning loop with pluggable acquisition
//! - [`cli`]: subcommand implementations for the `dirmi` binary
//!
//! Every runnable capability has a worked example under `examples/`; start
//! with `cargo run --example score_report`.

pub mod active;
pub mod cli;
pub mod data;
pub mod dirichlet;
pub mod error;
pub mod estimation;
pub mod model;
pub mod specfun;
pub mod uncertainty;

pub use error::{Error, Result};

/// Derive a child RNG seed from a base seed and two stream coordinates
/// (e.g. iteration and item index).
///
/// Uses the splitmix64 finalizer, so distinct coordinates give
/// well-separated seeds and the mapping is stable across platforms. All
/// seeded work in this crate derives child seeds this way; parallel loops
/// can therefore hand every item its own RNG and stay independent of thread
/// count and scheduling order.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(base ^ mix(stream ^ mix(index)))
}
