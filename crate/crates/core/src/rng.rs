//! Reproducible random number streams.
//!
//! Every replica derives its generators from `(seed, replica_index, purpose)`
//! through ChaCha8 stream selection, so results are a pure function of the
//! config no matter how replicas are scheduled. Tree randomness is keyed per
//! vertex (see [`VertexKey`]) so that a tree is a function of its seed alone,
//! independent of the order in which the walk touches it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a derived stream is used for. Keeps streams for different jobs of the
/// same replica disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Tree,
    Walk,
    Bootstrap,
    Aux,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Tree => 1,
            Purpose::Walk => 2,
            Purpose::Bootstrap => 3,
            Purpose::Aux => 4,
        }
    }
}

/// Root of all randomness for one experiment.
#[derive(Debug, Clone, Copy)]
pub struct SeedTree {
    seed: u64,
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        SeedTree { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for `(replica, purpose)`. An extra `episode` counter separates
    /// e.g. successive rejection-sampled trees inside one replica.
    pub fn stream(&self, replica: u64, purpose: Purpose, episode: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&replica.to_le_bytes());
        key[16..24].copy_from_slice(&purpose.tag().to_le_bytes());
        key[24..32].copy_from_slice(&episode.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        // set_stream keeps the counter-based split explicit even though the
        // key already separates streams.
        rng.set_stream(purpose.tag());
        rng
    }

    /// Seed for per-vertex tree randomness of `(replica, episode)`.
    pub fn tree_root_key(&self, replica: u64, episode: u64) -> VertexKey {
        VertexKey(splitmix64(
            splitmix64(self.seed ^ 0x9e37_79b9_7f4a_7c15)
                ^ splitmix64(replica.wrapping_add(0x1234_5678))
                ^ episode.wrapping_mul(0xda94_2042_e4dd_58b5),
        ))
    }
}

/// Stable identity of a tree vertex: a hash of the child-index path from the
/// root. Child counts and survival flags are drawn from a generator seeded by
/// this key, so materialization order cannot change the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VertexKey(pub u64);

impl VertexKey {
    pub fn child(self, index: u32) -> VertexKey {
        VertexKey(splitmix64(self.0 ^ (u64::from(index) + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.0.to_le_bytes());
        key[8..16].copy_from_slice(&splitmix64(self.0).to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

/// SplitMix64 finalizer; the standard 64-bit mixer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
