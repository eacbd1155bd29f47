//! Deterministic seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream seeded with a
//! 64-bit value. Sub-streams (trial `r`, column `j`, noise, ...) get their
//! seeds by folding the indices into the parent seed with the SplitMix64
//! finalizer, so any piece of an experiment can be regenerated on its own
//! and jobs can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for [`derive`], kept distinct so sub-streams never collide.
pub mod stream {
    pub const GRAPH: u64 = 0x6772_6170_6800_0001;
    pub const SIGNAL: u64 = 0x7369_676e_616c_0002;
    pub const NOISE: u64 = 0x6e6f_6973_6500_0003;
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Hashes `parent` together with `parts` into a new seed.
pub fn derive(parent: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(parent), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
