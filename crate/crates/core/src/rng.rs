//! Reproducible random streams.
//!
//! Every stochastic routine takes an explicit generator. Batch jobs derive one
//! stream per replicate from a [`StreamKey`], so results depend only on the seed
//! and the replicate index, never on how replicates are spread over threads.
//! Streams are ChaCha8 keystreams: the key comes from the seed, the 64-bit
//! stream id from the derivation path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Address of an independent random stream: a seed plus a derivation path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub seed: u64,
    path: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey { seed, path: 0 }
    }

    /// Key of the `index`-th child stream. Children of distinct indices (and of
    /// distinct parents) address distinct streams.
    pub fn child(&self, index: u64) -> Self {
        let path = splitmix64(self.path ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)));
        StreamKey { seed: self.seed, path }
    }

    /// Child keyed by a label, for separating unrelated uses of one seed.
    pub fn named(&self, label: &str) -> Self {
        let h = label
            .bytes()
            .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3));
        self.child(h)
    }

    pub fn rng(&self) -> StreamRng {
        let mut key = [0u8; 32];
        let mut s = self.seed;
        for chunk in key.chunks_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.path);
        rng
    }
}

/// Generator for the `index`-th replicate of a seeded batch.
pub fn replicate_rng(seed: u64, index: u64) -> StreamRng {
    StreamKey::new(seed).child(index).rng()
}
