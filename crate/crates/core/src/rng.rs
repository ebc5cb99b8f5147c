//! Seed derivation and portable random draws.
//!
//! Every sample gets its own ChaCha8 stream keyed by a SplitMix64 mix of
//! the master seed and the sample index, so any index can be generated
//! independently of all others (random access, no sequential stream).
//!
//! All draws map raw ChaCha output to floats in this module, and
//! transcendentals (Box-Muller, angles) go through `libm` rather than the
//! platform libm, so identical seeds produce identical bits on every host.

use rand::{RngCore, SeedableRng};
// Re-exported so callers can name the stream type without depending on
// rand_chacha themselves.
pub use rand_chacha::ChaCha8Rng;

/// Identifier of the seed derivation rule, recorded in dataset manifests.
pub const SEED_RULE: &str = "splitmix64-xor-v1";

/// SplitMix64 finalizer (Steele et al.).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample seed: a 64-bit mix of master seed and sample index.
pub fn sample_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(index))
}

/// Deterministic stream for one sample (or one texture, one augmentation...).
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (rng.next_u64() >> 11) as f64 * SCALE
}

/// Uniform draw in `[lo, hi)`.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Uniform index in `0..n`. Consumes exactly one draw.
pub fn index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    assert!(n > 0, "index range must be nonempty");
    ((unit(rng) * n as f64) as usize).min(n - 1)
}

/// Uniform integer in `lo..=hi`. Consumes exactly one draw.
pub fn int_inclusive(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> i64 {
    assert!(lo <= hi, "empty integer range");
    lo + index(rng, (hi - lo + 1) as usize) as i64
}

/// Standard normal via Box-Muller. Consumes exactly two draws, and the
/// result is std-linear: the same stream state with a scaled std yields an
/// exactly scaled value.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // u1 in (0,1]: avoid ln(0).
    let u1 = 1.0 - unit(rng);
    let u2 = unit(rng);
    (-2.0 * libm::log(u1)).sqrt() * libm::cos(2.0 * std::f64::consts::PI * u2)
}
