//! Deterministic seeding helpers.
//!
//! Every stochastic routine in this crate takes an explicit `u64` seed and
//! builds its own [`ChaCha8Rng`] from it, so repeated runs with the same
//! inputs are bit-identical. Sweeps and multi-setting acquisitions derive one
//! sub-seed per point with [`derived_seed`], which keeps points statistically
//! independent while remaining reproducible and order-insensitive.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; a single well-mixed output per input.
#[inline]
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the sub-seed for point `index` of a sweep seeded with `base`.
pub fn derived_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(1)))
}

/// Deterministic RNG for one simulated acquisition.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
