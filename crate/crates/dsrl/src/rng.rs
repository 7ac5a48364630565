//! Deterministic RNG stream derivation.
//!
//! Every random draw in an experiment comes from a stream keyed on the master
//! seed plus a path of integer tags (sweep index, trial index, purpose). Two
//! trials never share a stream, so the execution order and degree of
//! parallelism cannot change results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags separating the independent draws within one trial.
pub mod purpose {
    pub const NETWORK: u64 = 1;
    pub const TARGET: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const INIT: u64 = 4;
    pub const BASELINE_INIT: u64 = 5;
    /// Tag for the shared network in `--fixed-network` mode.
    pub const FIXED_NETWORK: u64 = 0xF1AED_0001;
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a 64-bit sub-seed from a master seed and a tag path.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = mix(master ^ 0x6A09_E667_F3BC_C908);
    for &t in tags {
        state = mix(state.wrapping_add(GOLDEN).wrapping_add(t));
    }
    state
}

/// Derive an independent ChaCha stream from a master seed and a tag path.
pub fn stream(master: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let mut s = derive_seed(master, tags);
    for chunk in seed.chunks_mut(8) {
        s = mix(s.wrapping_add(GOLDEN));
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
