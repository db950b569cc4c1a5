//! Counter-based random streams.
//!
//! A [`RandomStream`] is keyed by `(seed, stream_id)` and backed by ChaCha8,
//! whose 64-bit stream selector gives independent keystreams for distinct
//! ids under the same seed. Child streams are derived from the parent's ids
//! alone (never from its consumed state) through a SplitMix64 finalizer, so
//! replicate `i` of a parallel job always sees the same numbers no matter
//! which thread runs it or in which order.
//!
//! Normals use the Box–Muller transform on one open-interval uniform and one
//! half-open uniform; the second value of each pair is cached and returned by
//! the next call.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
            spare_normal: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Substream `index` of this stream: same seed, id
    /// `mix64(stream_id ^ mix64(index))`.
    pub fn child(&self, index: u64) -> RandomStream {
        let id = mix64(self.stream_id ^ mix64(index).rotate_left(17));
        RandomStream::new(self.seed, id)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn draw_uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn draw_open_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    pub fn draw_std_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.draw_open_uniform();
        let u2 = self.draw_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
