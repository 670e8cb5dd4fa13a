//! Per-trial random streams.
//!
//! Trial `i` of a run with master seed `s` uses ChaCha20 keyed by
//! `seed_from_u64(s)` on stream `i`. ChaCha is counter based, so streams are
//! independent and the assignment does not depend on how trials are
//! scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type TrialRng = ChaCha20Rng;

/// Algorithm name recorded in output headers.
pub const RNG_ALGORITHM: &str = "chacha20";

pub fn trial_rng(master_seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}
