//! Seeded random streams.
//!
//! Every noise source draws from its own ChaCha stream keyed by the master
//! seed, so changing how often one subsystem draws never shifts another.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Identifies an independent stream forked from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Gyro = 1,
    Accel = 2,
    Ultrasonic = 3,
    Detector = 4,
    Scenario = 5,
    Sweep = 6,
}

#[derive(Debug, Clone)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn fork(master_seed: u64, subsystem: Subsystem) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(subsystem as u64);
        Self(rng)
    }

    /// Zero-mean normal sample. Always consumes one draw, even when `sigma == 0`.
    pub fn gaussian(&mut self, sigma: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.0);
        z * sigma
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Bernoulli trial. Always consumes one draw.
    pub fn chance(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}

/// The per-subsystem streams used by one simulation.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub gyro: RngStream,
    pub accel: RngStream,
    pub ultrasonic: RngStream,
    pub detector: RngStream,
}

impl RngStreams {
    pub fn new(master_seed: u64) -> Self {
        Self {
            gyro: RngStream::fork(master_seed, Subsystem::Gyro),
            accel: RngStream::fork(master_seed, Subsystem::Accel),
            ultrasonic: RngStream::fork(master_seed, Subsystem::Ultrasonic),
            detector: RngStream::fork(master_seed, Subsystem::Detector),
        }
    }
}
