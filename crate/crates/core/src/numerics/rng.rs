//! Reproducible random streams keyed by `(master_seed, stream_id)`.
//!
//! Each stream is a ChaCha8 keystream: the key is expanded from the master
//! seed and the 64-bit ChaCha stream selector is the stream id, so any
//! `(master_seed, stream_id)` pair maps to one fixed sequence no matter which
//! worker draws it or in what order streams are created.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    counter: u64,
    core: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut core = ChaCha8Rng::seed_from_u64(master_seed);
        core.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            counter: 0,
            core,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of variates drawn from this stream so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Uniform variate on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.counter += 1;
        let bits = self.core.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.counter += 1;
        StandardNormal.sample(&mut self.core)
    }
}

/// Derive the child stream `child_id` under the parent's master seed.
///
/// The child depends only on `(master_seed, child_id)`; the parent's position
/// is irrelevant.
pub fn split_stream(parent: &RngStream, child_id: u64) -> RngStream {
    RngStream::new(parent.master_seed, child_id)
}
