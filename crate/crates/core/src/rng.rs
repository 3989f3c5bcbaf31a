//! Named, seed-derived random substreams. Every consumer of randomness asks
//! for its own stream by name so that adding a consumer never shifts another
//! consumer's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A root seed from which independent named streams are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    root: u64,
}

impl SeedTree {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Child tree for a named consumer.
    pub fn child(&self, name: &str) -> SeedTree {
        SeedTree {
            root: splitmix64(self.root ^ fnv1a(name.as_bytes())),
        }
    }

    /// Child tree for the `index`-th replicate of a consumer.
    pub fn index(&self, index: u64) -> SeedTree {
        SeedTree {
            root: splitmix64(self.root.wrapping_add(splitmix64(index.wrapping_add(0x9e37)))),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.root)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
