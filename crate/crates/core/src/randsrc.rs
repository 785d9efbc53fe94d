//! Reproducible random sources.
//!
//! A [`RandomStream`] is a ChaCha8 generator keyed by `(seed, stream_id)`:
//! the seed expands to the ChaCha key and the stream id selects one of the
//! 2^64 independent ChaCha streams under that key. Identical pairs replay
//! identical sequences on every platform.
//!
//! Per-replicate work draws from [`RandomStream::substream`], which derives a
//! fresh key from `(seed, stream_id)` and uses the replicate index as the
//! stream id. Results therefore do not depend on how replicates are scheduled
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::linalg::{self, Matrix};

/// Name of the base generator, recorded in experiment metadata.
pub const GENERATOR: &str = "chacha8";

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable 64-bit key for a string (FNV-1a followed by a splitmix finalizer).
pub fn key_of(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h)
}

#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent child stream number `index`, a pure function of
    /// `(seed, stream_id, index)`.
    pub fn substream(&self, index: u64) -> RandomStream {
        RandomStream::new(mix64(self.seed ^ mix64(self.stream_id)), index)
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = self.normal();
        }
    }

    pub fn chi(&mut self, d: usize) -> f64 {
        ChiSampler::new(d).sample(self)
    }

    /// Uniform point on `S^{d−1}`: a normalized Gaussian vector.
    pub fn sphere(&mut self, d: usize) -> Vec<f64> {
        let mut u = vec![0.0; d];
        self.fill_sphere(&mut u);
        u
    }

    pub fn fill_sphere(&mut self, out: &mut [f64]) {
        loop {
            self.fill_normal(out);
            let n = linalg::norm(out);
            if n > 1e-150 {
                for x in out.iter_mut() {
                    *x /= n;
                }
                return;
            }
        }
    }

    /// Haar-distributed orthogonal matrix.
    pub fn haar_orthogonal(&mut self, d: usize) -> Matrix {
        let mut cols = vec![0.0; d * d];
        self.fill_haar_columns(&mut cols, d);
        let mut m = Matrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                m[(i, j)] = cols[j * d + i];
            }
        }
        m
    }

    /// Haar orthogonal matrix written column-major into `cols` (length d²).
    ///
    /// Gram–Schmidt on a Gaussian matrix with positive pivots; a degenerate
    /// draw is discarded and redrawn.
    pub fn fill_haar_columns(&mut self, cols: &mut [f64], d: usize) {
        debug_assert_eq!(cols.len(), d * d);
        loop {
            self.fill_normal(cols);
            if linalg::orthonormalize_columns(cols, d, d).is_ok() {
                return;
            }
        }
    }
}

/// `χ(d)` sampler: `√g` with `g ~ Gamma(d/2, scale 2)`.
#[derive(Clone, Debug)]
pub struct ChiSampler {
    gamma: Gamma<f64>,
}

impl ChiSampler {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "chi distribution needs d >= 1");
        ChiSampler {
            gamma: Gamma::new(d as f64 / 2.0, 2.0).expect("valid gamma parameters"),
        }
    }

    #[inline]
    pub fn sample(&self, s: &mut RandomStream) -> f64 {
        self.gamma.sample(&mut s.rng).sqrt()
    }
}
