//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by the
//! experiment seed and a stream id. ChaCha is counter based, so the sample
//! sequence of a stream does not depend on which other streams were consumed
//! or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids reserved by the library. Callers may use any id at or above
/// [`streams::USER`].
pub mod streams {
    pub const MULTISTART: u64 = 1 << 32;
    pub const PERTURBATION: u64 = 2 << 32;
    pub const PROBE: u64 = 3 << 32;
    pub const USER: u64 = 1 << 48;
}

/// Independent generator for `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
