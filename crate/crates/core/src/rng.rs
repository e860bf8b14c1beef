//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit stream. Independent streams for
//! trials, examples or blocks come from [`split`], which selects a distinct
//! ChaCha stream id under the same key, so no two consumers ever share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The `index`-th independent child stream of `seed`.
pub fn split(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// Uniform draw on the half-open interval (0, 1].
pub fn open_closed01<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
