//! Seed derivation and counter-based random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Words of keystream reserved for each slot of a shot.
pub const WORDS_PER_SLOT: u128 = 16;

/// SplitMix64 mix of `(seed, index)`, giving well-separated child seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for `(shot, slot)`: the shot selects the ChaCha stream and
/// the slot a fixed offset into it, so draws do not depend on evaluation order.
pub fn slot_rng(seed: u64, shot: u64, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng.set_word_pos(slot as u128 * WORDS_PER_SLOT);
    rng
}
