//! Deterministic random streams keyed by position in a computation, so that
//! results never depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Independent stream for the key `(seed, a, b, c)`.
pub fn keyed_stream(seed: u64, a: u64, b: u64, c: u64) -> Stream {
    let mut bytes = [0u8; 32];
    for (chunk, word) in bytes.chunks_exact_mut(8).zip([seed, a, b, c]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

/// Stream for a sampled cost share: `(seed, step, player, resource)`.
pub fn share_stream(seed: u64, step: u64, player: usize, resource: usize) -> Stream {
    keyed_stream(seed, step, player as u64, resource as u64)
}
