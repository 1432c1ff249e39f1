//! Deterministic seeding scheme.
//!
//! All randomness in the crate flows from [`ChaCha8Rng`] instances created
//! here. Experiments derive one child seed per (grid point, trial) pair from a
//! single master seed via a fixed [SplitMix64] mix, so trials are mutually
//! independent streams yet the whole run is reproducible regardless of how
//! trials are scheduled across threads.
//!
//! [SplitMix64]: https://prng.di.unimi.it/splitmix64.c

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One step of the SplitMix64 generator: advances `state` and returns the
/// next output word.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with two stream labels into a child seed.
///
/// The labels are fed through the generator sequentially, so
/// `mix_seed(m, a, b)` differs from `mix_seed(m, b, a)` and from
/// `mix_seed(m', a, b)` for any other master `m'`.
pub fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut state = master;
    let mut out = splitmix64(&mut state);
    state ^= a.wrapping_mul(0xff51_afd7_ed55_8ccd);
    out ^= splitmix64(&mut state);
    state ^= b.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    out ^ splitmix64(&mut state)
}

/// Creates the deterministic generator used everywhere in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Creates the child generator for stream `(a, b)` under `master`.
pub fn child_rng(master: u64, a: u64, b: u64) -> ChaCha8Rng {
    rng_from_seed(mix_seed(master, a, b))
}
