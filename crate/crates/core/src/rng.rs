//! Counter-based random streams: stream `i` of a master seed is a pure
//! function of `(seed, i)`, so parallel draws do not depend on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform on (0, 1) with 53 random bits, never exactly 0 or 1.
pub fn open_uniform<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

pub fn open_uniforms(seed: u64, index: u64, out: &mut [f64]) {
    let mut rng = stream(seed, index);
    for x in out {
        *x = open_uniform(&mut rng);
    }
}
