//! Seed-derived random streams.
//!
//! A single experiment seed fans out into disjoint ChaCha streams keyed by
//! name (and optionally generation/index), so drawing more numbers from one
//! consumer never shifts the values another consumer sees.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named substreams used by the experiment harness.
pub const STREAM_ES_SAMPLING: &str = "es_sampling";
pub const STREAM_BUFFER_SAMPLING: &str = "buffer_sampling";
pub const STREAM_TARGET_NOISE: &str = "target_noise";
pub const STREAM_EXPLORATION: &str = "exploration";
pub const STREAM_INIT: &str = "init";

#[derive(Debug, Clone, Copy)]
pub struct RngTree {
    seed: u64,
}

impl RngTree {
    pub fn new(seed: u64) -> Self {
        RngTree { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for a named consumer.
    pub fn stream(&self, name: &str) -> ChaCha8Rng {
        self.make(fnv1a(name.as_bytes()))
    }

    /// Stream for a per-generation, per-index consumer such as one rollout.
    pub fn indexed_stream(&self, name: &str, generation: u64, index: u64) -> ChaCha8Rng {
        let mut h = fnv1a(name.as_bytes());
        h = fnv1a_extend(h, &generation.to_le_bytes());
        h = fnv1a_extend(h, &index.to_le_bytes());
        self.make(h)
    }

    fn make(&self, stream_id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream_id);
        rng
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    fnv1a_extend(0xcbf2_9ce4_8422_2325, bytes)
}

fn fnv1a_extend(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
