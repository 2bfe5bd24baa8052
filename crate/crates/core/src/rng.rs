//! Seeded random streams.
//!
//! Every random draw in the crate comes from ChaCha20 (`rand_chacha` 0.9)
//! seeded through `SeedableRng::seed_from_u64`. Benchmark instances get their
//! own stream of the generator keyed by the base seed:
//! stream id = `(cell_index << 32) | instance_index`. Streams never overlap,
//! so results do not depend on the order in which instances are evaluated.

use rand::SeedableRng;
pub use rand_chacha::ChaCha20Rng;

pub fn seeded(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn instance_stream(base_seed: u64, cell_index: usize, instance_index: usize) -> ChaCha20Rng {
    assert!(cell_index <= u32::MAX as usize && instance_index <= u32::MAX as usize);
    let mut rng = ChaCha20Rng::seed_from_u64(base_seed);
    rng.set_stream(((cell_index as u64) << 32) | instance_index as u64);
    rng
}
