//! Seed derivation and portable sampling primitives.
//!
//! Every random quantity in this crate is drawn from a ChaCha8 stream seeded
//! through [`sub_seed`], so a whole experiment is determined by one master
//! seed plus the index path of whatever asked for randomness (scenario,
//! flight, model). ChaCha8 output is stable across platforms, and the inverse
//! transforms below are written out by hand so results cannot drift with a
//! distribution crate's internals.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// The generator used everywhere randomness is needed.
pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer: a bijective avalanche mix on 64 bits.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the `index`-th child seed of `base`.
///
/// Children of one base never collide with each other for distinct indices,
/// and the avalanche step keeps children of nearby bases uncorrelated. Used
/// to hand every scenario, flight and model its own independent stream.
pub fn sub_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Uniform draw in `[0, 1)` with 53-bit resolution.
pub fn unit(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform_in(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Exponential draw with the given mean, by inverse transform.
///
/// A zero mean collapses to the point mass at zero.
pub fn exponential(rng: &mut Rng, mean: f64) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    // unit() is in [0, 1), so the argument of ln is in (0, 1].
    -mean * (1.0 - unit(rng)).ln()
}

/// Standard normal draw via Box-Muller, two uniforms per call.
pub fn standard_normal(rng: &mut Rng) -> f64 {
    let u1 = unit(rng);
    let u2 = unit(rng);
    // 1 - u1 is in (0, 1], keeping the log finite.
    let r = (-2.0 * (1.0 - u1).ln()).sqrt();
    r * (std::f64::consts::TAU * u2).cos()
}
