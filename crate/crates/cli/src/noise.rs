//! Seeded synthetic noise. Every pipeline draws from its own ChaCha stream so
//! adding a trace to one pipeline never shifts the noise of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Nutation = 1,
    Echo = 2,
    Lifetime = 3,
}

/// Generator for `stream`, sub-stream `sub`, under the run seed.
pub fn rng(seed: u64, stream: Stream, sub: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(((stream as u64) << 32) | sub);
    r
}

/// Adds zero-mean gaussian noise of standard deviation `sigma`.
pub fn add_gaussian(values: &mut [f64], sigma: f64, rng: &mut ChaCha8Rng) {
    if sigma == 0.0 {
        return;
    }
    let n = Normal::new(0.0, sigma).expect("sigma is finite and > 0");
    values.iter_mut().for_each(|v| *v += n.sample(rng));
}

/// Multiplies by `exp(N(0, sigma²))`.
pub fn apply_lognormal(value: f64, sigma: f64, rng: &mut ChaCha8Rng) -> f64 {
    if sigma == 0.0 {
        return value;
    }
    let n = Normal::new(0.0f64, sigma).expect("sigma is finite and > 0");
    value * n.sample(rng).exp()
}
