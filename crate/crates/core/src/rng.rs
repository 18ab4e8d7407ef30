//! Deterministic RNG substreams.
//!
//! All randomness in the crate flows from one user-supplied seed through named
//! substreams, so every operation is reproducible bit-for-bit regardless of
//! thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named substreams, kept stable across releases: reports and golden tests
/// depend on them.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    EdgeSampling = 1,
    WalkExtension = 2,
    JlSketch = 3,
    TreeRoots = 4,
    Generate = 5,
}

/// RNG for (seed, stream), optionally split further by a chunk index so that
/// sample ranges can be partitioned across workers deterministically.
pub fn substream(seed: u64, stream: Stream, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((stream as u64) << 56));
    rng.set_stream(chunk.wrapping_add(1));
    rng
}

/// splitmix64 finalizer: derives an independent seed from (seed, salt),
/// used to decorrelate stages that share one user seed.
pub fn mix(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Draw a uniform f64 in [0, hi).
pub fn uniform(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    use rand::Rng;
    rng.random::<f64>() * hi
}
