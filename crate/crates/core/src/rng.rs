//! Keyed RNG streams.
//!
//! Every random draw in the crate comes from a stream identified by a base
//! seed plus a small key path, e.g. `(seed, replicate, node)`. Work can then be
//! scheduled in any order without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a base seed and a key path.
pub fn derive_seed(seed: u64, keys: &[u64]) -> u64 {
    let mut state = seed;
    let mut out = splitmix64(&mut state);
    for &k in keys {
        state ^= out.rotate_left(17) ^ k;
        out = splitmix64(&mut state);
    }
    out
}

/// A ChaCha8 stream keyed by `(seed, keys...)`.
pub fn stream(seed: u64, keys: &[u64]) -> StreamRng {
    let mut state = derive_seed(seed, keys);
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
