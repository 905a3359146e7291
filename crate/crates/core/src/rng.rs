//! Seeded random streams.
//!
//! Every randomized routine takes an explicit stream. Streams come from
//! ChaCha20 (a counter-based generator): the master seed keys the cipher and
//! the trial index selects the 64-bit stream id, so trial `i` of a sweep is
//! reproducible in isolation and independent of execution order.

use rand::SeedableRng;
pub use rand_chacha::ChaCha20Rng as Stream;

/// Stream for trial `trial` under `master_seed`.
pub fn trial_stream(master_seed: u64, trial: u64) -> Stream {
    let mut rng = Stream::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
