//! Counter-based random streams.
//!
//! A stream is a pure function of `(key, counter)`: the key is derived from a
//! base seed and an index path, and draw `k` is `mix(key + k * GAMMA)`. This is
//! SplitMix64 with the state replaced by an explicit counter, so any
//! `(seed, indices, k)` can be regenerated independently and bit-exactly.

use rand_core::{impls, RngCore};

/// Identifier recorded in sweep metadata.
pub const ALGORITHM: &str = "splitmix64-ctr/v1";

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomStream {
    key: u64,
    counter: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: mix64(seed ^ 0x6A09_E667_F3BC_C908),
            counter: 0,
        }
    }

    /// Child stream for `index`; independent of the parent's position.
    pub fn split(&self, index: u64) -> Self {
        // distinct odd multipliers keep (key, index) -> key' injective in practice
        let k = mix64(
            self.key
                ^ mix64(
                    index
                        .wrapping_mul(GAMMA)
                        .wrapping_add(0xD1B5_4A32_D192_ED03),
                ),
        );
        Self {
            key: mix64(k.wrapping_add(GAMMA)),
            counter: 0,
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Uniform in `[0, 1)` with 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

/// Stream for the index path `indices` under `base_seed`.
pub fn substream(base_seed: u64, indices: &[u64]) -> RandomStream {
    indices
        .iter()
        .fold(RandomStream::new(base_seed), |s, &i| s.split(i))
}
