//! Per-trial random streams: one ChaCha8 generator per `(seed, trial)`, so
//! results do not depend on the order in which trials are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
