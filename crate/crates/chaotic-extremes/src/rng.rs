//! Seeded, order-independent pseudo-random substreams.
//!
//! Every stochastic operation derives one generator per replica from
//! `(seed, stream, index)`, so results do not depend on how replicas are
//! scheduled across worker threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Scalar;

/// Stream tags keep the substreams of distinct operations disjoint even when
/// they share a user-provided seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamTag {
    Measure = 1,
    Maxima = 2,
    Dprime = 3,
    Correlation = 4,
    DepthHistogram = 5,
    Clt = 6,
}

/// Generator for replica `index` of the given operation stream.
pub fn substream(seed: u64, tag: StreamTag, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(tag as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..32].copy_from_slice(b"chaotext");
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in `[0, 1)` converted to the working scalar type.
pub fn uniform01<F: Scalar, R: Rng>(rng: &mut R) -> F {
    F::from_f64(rng.random::<f64>()).unwrap()
}
