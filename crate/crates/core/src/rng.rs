//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a [`RngHandle`] addressed by a
//! master seed and a 64-bit stream id. Stream ids are derived from a domain
//! tag plus the logical coordinates of the draw (RP, AP, sample, trial), so
//! the value of any draw is independent of iteration order and thread count.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// What a substream is used for. Keeps unrelated draws from sharing ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    OfflineRssi = 1,
    OfflineDoa = 2,
    OnlineMeasurement = 3,
    TestPoint = 4,
    Oracle = 5,
}

/// A single-owner random stream.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Substream for `domain` at the given logical coordinates.
    pub fn derive(seed: u64, domain: Domain, coords: &[u64]) -> Self {
        Self::new(seed, stream_id(domain, coords))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// One draw from N(0, 1).
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw in `[low, high)`.
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.rng.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream_id(domain: Domain, coords: &[u64]) -> u64 {
    let mut h = splitmix64(domain as u64);
    for &c in coords {
        h = splitmix64(h ^ c);
    }
    h
}
