//! Counter-keyed random substreams.
//!
//! Every replicate draws from ChaCha8 streams addressed by `(seed, replicate,
//! stream)`, so a replicate's randomness does not depend on which worker runs
//! it or on how many replicates ran before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in every summary so results can be regenerated.
pub const GENERATOR_ID: &str = "chacha8-splittable-v1";

/// Purpose of a substream within one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Stream {
    Truth = 0,
    Noise = 1,
    Init = 2,
    Design = 3,
}

/// Replicate indices must fit in 56 bits so the stream id can be packed below them.
pub const MAX_REPLICATES: u64 = 1 << 56;

/// Independent generator for `(seed, replicate, stream)`.
pub fn substream(seed: u64, replicate: u64, stream: Stream) -> ChaCha8Rng {
    assert!(replicate < MAX_REPLICATES, "replicate index {replicate} exceeds 2^56");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replicate << 8) | stream as u64);
    rng
}
