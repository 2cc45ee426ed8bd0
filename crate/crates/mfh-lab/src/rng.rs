//! Deterministic random-number substreams.
//!
//! Every random draw in the library comes from a named substream derived
//! from a master seed plus a list of integer tags (stage, seed index,
//! channel, ...). Substreams are independent ChaCha12 generators whose
//! 256-bit keys are expanded from the tag list with a SplitMix64 chain,
//! so the same `(master, tags)` pair always yields the same stream on
//! every platform, and consuming one stream never perturbs another.
//!
//! Experiments key their stages as follows: the dataset stage is keyed by
//! `(master, DATA, seed)` only — deliberately not by sweep point — so all
//! points of a sweep at a given seed share the same latent draws (common
//! random numbers make curves comparable point-to-point). Training stages
//! are keyed by `(master, stage, point, seed)`, so adding a new teacher
//! flavor never perturbs existing columns.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stage tags for substream derivation. Keeping them in one place avoids
/// accidental collisions between experiment stages.
pub mod stage {
    /// Dataset draws: delta, latent factors, modality noise.
    pub const DATA: u64 = 1;
    /// Teacher training.
    pub const TEACHER: u64 = 2;
    /// Student training / distillation.
    pub const STUDENT: u64 = 3;
    /// Joint two-branch training used by feature ranking.
    pub const JOINT: u64 = 4;
    /// Channel permutations inside feature ranking.
    pub const PERM: u64 = 5;
    /// Random nullification plans.
    pub const PLAN: u64 = 6;
    /// Bound-verification instance generation.
    pub const THEOREM: u64 = 7;
    /// Seeded model initialization (hidden-layer models).
    pub const INIT: u64 = 8;
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent generator for `(master, tags)`.
///
/// The derivation absorbs each tag into a SplitMix64 state and then
/// squeezes four 64-bit words as the ChaCha key, so streams for different
/// tag lists are unrelated even when the lists share a prefix.
pub fn substream(master: u64, tags: &[u64]) -> ChaCha12Rng {
    let mut state = master;
    // One mixing step up front so master=0 does not start from the weak
    // all-zero state.
    let _ = splitmix64(&mut state);
    for &t in tags {
        let mut tag_state = t ^ 0xa076_1d64_78bd_642f;
        state ^= splitmix64(&mut tag_state);
        let _ = splitmix64(&mut state);
    }
    // Absorb the tag count so ([1], master) and ([1, 0], master) differ
    // even if a zero tag mixes to something that collides.
    state ^= (tags.len() as u64).wrapping_mul(0xe703_7ed1_a0b4_28db);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}
