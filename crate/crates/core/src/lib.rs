//! Longest-common-subsequence fluctuation laboratory.
//!
//! This crate studies how the LCS of random string pairs fluctuates, in two
//! settings:
//!
//! * **iid pairs** — uniform random strings over a k-letter alphabet,
//!   possibly of unequal lengths, for estimating the mean-LCS curve, its
//!   n→∞ limit, and the variance growth in the length;
//! * **the planted-run model** — an iid string of length `2d·m` that
//!   independently receives, in each of `m` evenly spaced windows of size
//!   `ell + 1` (with `ell ≈ d^beta`), a constant run of a random letter.
//!   Planted runs inflate the LCS against an independent partner; the
//!   machinery here measures that gain, localizes it with a constrained
//!   block alignment, and follows it along a run-by-run revert chain.
//!
//! Layout:
//!
//! * [`lcs`] — scoring engines: quadratic DP, bit-parallel DP, and two
//!   independent oracles for cross-checks;
//! * [`model`] — parameters, sampling, run placement, single-run
//!   replacement, and the revert chain;
//! * [`align`] — window-constrained partition alignment: optimal split
//!   points, gap-band diagnostics, and the capped atypical-score DP;
//! * [`estimate`] — Monte Carlo estimators built on the above;
//! * [`stats`] — moments, bootstrap, least squares, binomial tail;
//! * [`rng`] — seed derivation and per-replicate deterministic streams.
//!
//! All randomness flows through explicit `u64` seeds; every estimator is
//! reproducible bit-for-bit regardless of thread count.

pub mod align;
pub mod error;
pub mod estimate;
pub mod lcs;
pub mod model;
pub mod rng;
pub mod stats;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub use align::{
    optima_all_typical, optimal_partition, partition_diagnostics, score_partition, GapInterval,
    Partition, PartitionDiagnostics,
};
pub use estimate::{
    coupling_path_stats, estimate_bias, estimate_gamma_point, estimate_mean_curve,
    estimate_one_block_bias, estimate_variance, event_frequencies, fit_gamma_star,
    fit_scaling_slope, solve_asymmetry, BiasEstimate, CouplingPathStats, EventFrequencies,
    GammaStarFit, MeanCurveEstimate, MeanCurvePoint, ScalingFit, VarianceEstimate, VarianceSource,
};
pub use lcs::{lcs_bitparallel, lcs_dp, lcs_lpp_oracle, lcs_oracle, LcsScore};
pub use model::{
    build_coupling_chain, gen_iid, place_blocks, replace_random_block, sample_pair, CouplingChain,
    ModelParams, ReplacementDraw, StringSample,
};
pub use rng::{derive_seed, seeded_rng, stream_rng};
