//! Counter-based normal deviates.
//!
//! Algorithm: ChaCha8 keyed by `seed_from_u64(seed)`, stream id = `stream`, and
//! deviate `index` taken from 32-bit word position `4·index`. The two 64-bit
//! words there are mapped to uniforms `u1 ∈ (0, 1]`, `u2 ∈ [0, 1)` with 53-bit
//! resolution and combined with the cosine branch of Box–Muller. A deviate is
//! therefore a pure function of `(seed, stream, index)`, independent of the order
//! in which deviates are drawn and of the platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS_PER_DEVIATE: u128 = 4;
const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Sequential reader over one `(seed, stream)` pair, starting at deviate 0.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Positions the reader so the next deviate is `index`.
    pub fn seek(&mut self, index: u64) {
        self.rng.set_word_pos(index as u128 * WORDS_PER_DEVIATE);
    }

    pub fn next_normal(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        let u1 = ((a >> 11) + 1) as f64 * TWO_POW_M53;
        let u2 = (b >> 11) as f64 * TWO_POW_M53;
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Standard normal deviate `index` of stream `(seed, stream)`.
pub fn normal_at(seed: u64, stream: u64, index: u64) -> f64 {
    let mut s = NormalStream::new(seed, stream);
    s.seek(index);
    s.next_normal()
}
