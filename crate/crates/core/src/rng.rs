//! Seed derivation.
//!
//! Every random quantity is drawn from a ChaCha stream keyed by
//! `(master seed, tag, index)`, so results never depend on evaluation order
//! or on how many threads share the work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Derives the 64-bit key of the substream `(seed, tag, index)`.
pub fn substream_key(seed: u64, tag: &str, index: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ fnv1a(tag)) ^ index)
}

pub fn substream(seed: u64, tag: &str, index: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(substream_key(seed, tag, index))
}
