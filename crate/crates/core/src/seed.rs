//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded with a
//! 64-bit value. Child streams are derived from a parent seed and an index
//! with [`derive_seed`]:
//!
//! ```text
//! derive_seed(base, index) = splitmix64(base + splitmix64(index))   (mod 2^64)
//! ```
//!
//! where `splitmix64` is the standard SplitMix64 output function. The
//! derivation depends only on `(base, index)`, so streams are independent of
//! execution order and thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The SplitMix64 output function (increment, then two xor-shift-multiply
/// rounds).
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(splitmix64(index)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
