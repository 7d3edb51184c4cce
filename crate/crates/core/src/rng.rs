//! Deterministic substream seeding.
//!
//! Parallel work items (disorder realizations, sweep cells, measurement pairs)
//! each get an independent RNG derived from (master seed, stream index), so
//! results do not depend on scheduling or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG for stream `stream` of master seed `seed`.
pub fn substream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut state = seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Nested substream (e.g. stream = cell, substream = realization).
pub fn substream_rng2(seed: u64, stream: u64, substream: u64) -> ChaCha12Rng {
    let mut state = seed ^ stream.wrapping_mul(0xA076_1D64_78BD_642F)
        ^ substream.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}
