//! Seed derivation and counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! 64-bit seed. Child seeds are derived as `seed ^ mix(index)`, so the value
//! of any stream depends only on the seed and its position in the derivation
//! tree, never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed for stream `index` of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    seed ^ mix64(index)
}

/// Tagged child seed, used to separate unrelated purposes (truth, data,
/// subsampling, SGD order...) drawn from one parent seed.
pub fn tagged_seed(seed: u64, tag: &str) -> u64 {
    // FNV-1a over the tag bytes.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    derive_seed(seed, h)
}

pub fn rng_from_seed(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// A keyed family of independent streams addressable by a 64-bit counter.
///
/// `stream(i)` is a pure function of `(seed, i)` and costs one key copy, so
/// sample `i` of a synthetic dataset can be regenerated without replaying
/// samples `0..i`.
#[derive(Clone)]
pub struct StreamFamily {
    base: StreamRng,
}

impl StreamFamily {
    pub fn new(seed: u64) -> Self {
        Self {
            base: StreamRng::seed_from_u64(seed),
        }
    }

    pub fn stream(&self, index: u64) -> StreamRng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        rng
    }
}
