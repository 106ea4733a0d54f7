//! Seeded random streams and replicate seed derivation.
//!
//! Every replicate of an experiment owns one [`StreamRng`] seeded from
//! `derive_replicate_seed(master, index)`. Results therefore depend only on
//! the master seed and the replicate index, never on how replicates are
//! scheduled across workers.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer; a bijection on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for replicate `index` of an experiment run under `master_seed`.
///
/// For a fixed master seed the map `index -> seed` is injective: the index is
/// multiplied by an odd constant (a bijection mod 2^64), offset, and passed
/// through the splitmix64 finalizer (also a bijection).
pub fn derive_replicate_seed(master_seed: u64, replicate_index: u64) -> u64 {
    mix64(master_seed.wrapping_add(GOLDEN.wrapping_mul(replicate_index.wrapping_add(1))))
}

/// A fresh random stream for `seed`.
pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on the open interval (0, 1) with 53 bits of resolution.
#[inline]
pub fn open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard exponential draw.
#[inline]
pub fn exp1<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    -crate::math::ln(open01(rng))
}
