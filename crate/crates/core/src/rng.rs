// SPDX-License-Identifier: Apache-2.0

//! Seedable generators. Every random stream in the crate is a ChaCha8
//! stream keyed by a `u64` seed, so any `(seed, stream)` pair can be
//! regenerated independently of the order in which streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded in `#rng <name> seed=<u64>` headers.
pub const RNG_NAME: &str = "chacha8";

pub type SimRng = ChaCha8Rng;

pub fn from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator keyed by `seed`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Metadata line (without the leading `#`) identifying the generator.
pub fn header(seed: u64) -> String {
    format!("rng {RNG_NAME} seed={seed}")
}
