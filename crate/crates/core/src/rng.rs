//! Seeded random streams.
//!
//! Every experiment has one root seed. Independent consumers (the optimizer,
//! the initial point, each noise trajectory) draw from child streams derived
//! deterministically from that root, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Root of a family of reproducible ChaCha streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    root: u64,
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Generator for stream `id`. Distinct ids never share keystream.
    pub fn child(&self, id: u64) -> Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root);
        rng.set_stream(id);
        rng
    }

    /// A nested family, keyed by `id`.
    pub fn derive(&self, id: u64) -> SeedStream {
        SeedStream::new(splitmix64(self.root ^ splitmix64(id.wrapping_add(0x5EED))))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Named stream ids used across the crate.
pub mod streams {
    pub const INITIAL_POINT: u64 = 1;
    pub const OPTIMIZER: u64 = 2;
    pub const OBJECTIVE: u64 = 3;
    pub const FINAL_SAMPLE: u64 = 4;
    pub const FINAL_EVAL: u64 = 5;
    pub const LANCZOS: u64 = 6;
}
