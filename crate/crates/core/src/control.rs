//! Reference generator for the null model.
//!
//! ChaCha20 in counter mode. It shares nothing with the xor/shift/add
//! structure under test.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::engine::to_unit;
use crate::planes::Point3;

pub struct ControlGen {
    rng: ChaCha20Rng,
}

impl ControlGen {
    /// Substream `stream` of the key derived from `seed`. Distinct streams do
    /// not overlap.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        ControlGen { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn next_unit(&mut self) -> f64 {
        to_unit(self.rng.next_u64())
    }

    /// Uniform point of `[0, 1)^3`.
    pub fn next_point(&mut self) -> Point3 {
        let x = self.next_unit();
        let y = self.next_unit();
        let z = self.next_unit();
        Point3 { x, y, z }
    }
}
