//! Seeded random streams.
//!
//! A run has one root seed. Each consumer draws from its own stream, derived
//! by xoring the root with a fixed label, so adding a consumer never shifts
//! the numbers another one sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream labels. The values are arbitrary but frozen.
pub mod stream {
    pub const GRAPH: u64 = 0x6772_6170_6800_0001;
    pub const DATA: u64 = 0x6461_7461_0000_0002;
    pub const PROBE: u64 = 0x7072_6f62_6500_0003;
    pub const SAMPLE: u64 = 0x7361_6d70_6c65_0004;
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for one purpose under a root seed.
pub fn derive(root: u64, label: u64) -> Rng {
    seeded(root ^ label)
}
