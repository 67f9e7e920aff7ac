//! Independent random streams addressed by `(seed, stage, role)`.
//!
//! The key is the run seed, the ChaCha stream id is the role and the word
//! position is derived from the stage, so any stage's draws can be
//! reproduced without replaying earlier stages.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words reserved per stage and role.
const WORDS_PER_STAGE: u128 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Player = 0,
    Adversary = 1,
    Signal = 2,
}

pub fn stream(seed: u64, stage: u64, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role as u64);
    rng.set_word_pos(stage as u128 * WORDS_PER_STAGE);
    rng
}
