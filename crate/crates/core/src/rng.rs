//! Deterministic seeding.
//!
//! Every replicate owns an RNG built from `(master_seed, stream_index)`, so
//! results never depend on worker count or completion order. ChaCha8 keeps
//! streams portable across platforms and rand releases.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; scrambles a counter into a well-mixed 64-bit value.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` under `master_seed`.
///
/// Distinct (master, index) pairs map to decorrelated seeds; equal pairs map
/// to equal seeds. Safe to nest (derive a sub-master, then derive from it).
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index.wrapping_mul(0xA076_1D64_78BD_642F)))
}

/// RNG for stream `index` under `master_seed`.
pub fn stream_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master_seed, index))
}

/// RNG seeded directly; entry point for the seed-taking public operations.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Fills a fresh vector with `len` uniform letters from `{0, .., k-1}`.
pub(crate) fn uniform_letters(rng: &mut impl RngExt, len: usize, k: usize) -> Vec<u8> {
    debug_assert!((2..=256).contains(&k));
    (0..len).map(|_| rng.random_range(0..k) as u8).collect()
}
