//! Seed handling.
//!
//! Every random stream in the crate is a ChaCha8 generator (`rand_chacha`),
//! which is portable across platforms and word sizes. Child streams are keyed
//! by mixing the parent seed with a path of integers through SplitMix64, so
//! the stream for e.g. `(seed, rank, restart)` never depends on how many
//! draws other attempts made.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed for a random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    /// Derives an independent child seed keyed by `path`.
    pub fn derive(self, path: &[u64]) -> RngSeed {
        let mut h = splitmix64(self.0);
        for &p in path {
            h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632B_E59B_D9B4_E019)));
        }
        RngSeed(h)
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
