//! Reproducible random-number streams.
//!
//! A stream is keyed by `(seed, stream_index)`. The generator is ChaCha8,
//! whose 64-bit stream parameter gives every index its own independent
//! keystream under the same key, so per-offspring streams can be handed to
//! parallel workers without changing the results.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

/// Creates the stream identified by `(seed, index)`.
pub fn spawn_stream(seed: u64, index: u64) -> RngStream {
    RngStream::new(seed, index)
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_index);
        Self {
            seed,
            stream_index,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Derives a child stream with the same seed whose index is a hash of
    /// this stream's index and `path`. Children do not depend on how many
    /// values were drawn from the parent.
    pub fn derive(&self, path: &[u64]) -> RngStream {
        let mut h = splitmix64(self.stream_index ^ 0x6a09_e667_f3bc_c908);
        for &p in path {
            h = splitmix64(h ^ splitmix64(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        RngStream::new(self.seed, h)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
