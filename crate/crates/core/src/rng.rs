//! Random streams.
//!
//! Every simulation instance owns one [`SimRng`]. Streams for replicates and
//! sweep points are derived by hashing a master seed together with the grid
//! coordinates, so a unit of work gets the same stream no matter which thread
//! runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-based generator used throughout the engine.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// SplitMix64 output function.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a master seed and a coordinate path.
///
/// Distinct paths (including paths of different length) give unrelated seeds.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut h = mix64(master ^ GOLDEN);
    for &c in path {
        h = mix64(h.wrapping_add(GOLDEN) ^ mix64(c.wrapping_add(GOLDEN)));
    }
    mix64(h ^ (path.len() as u64))
}

/// Coordinate tags so that network and dynamics streams never collide.
pub(crate) mod tag {
    pub const NETWORK: u64 = 0x6e65_7477_6f72_6b00;
    pub const RUN: u64 = 0x7275_6e00;
}
