//! Deterministic random streams.
//!
//! Every replicate owns a ChaCha8 stream selected by `(master_seed, index)`:
//! the seed fixes the key and the index selects one of 2^64 independent
//! stream positions, so results never depend on scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// The random-stream type used throughout the simulators.
pub type Stream = ChaCha8Rng;

/// Stream index reserved for one-off calibration work done before replicates.
pub const CALIBRATION_STREAM: u64 = u64::MAX;

/// Independent stream number `index` under `master_seed`.
pub fn stream(master_seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw strictly inside `(0, 1)`: the midpoint of one of 2^52 equal
/// cells. Every midpoint is exactly representable, so neither endpoint is
/// ever returned.
#[inline]
pub fn open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    ((rng.next_u64() >> 12) as f64 + 0.5) * SCALE
}
