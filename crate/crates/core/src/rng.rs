//! Reproducible random streams and the parallel Monte Carlo driver.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed (the seed's
//! little-endian bytes fill the first 8 of the 32 key bytes, the rest are
//! zero) with the ChaCha stream id set to the sample index. Sample `i` of a
//! run with seed `s` therefore sees the same bits no matter how the samples
//! are scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

/// Single-owner pseudorandom stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    /// Substream `index` of `seed`.
    pub fn new(seed: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        Self { rng }
    }

    /// Uniform phase in `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        self.rng.random::<f64>() * TAU
    }

    /// `e^{iφ}` with `φ` uniform in `[0, 2π)`.
    pub fn unit_complex(&mut self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase())
    }

    /// Complex standard normal: `E|z|² = 1`, variance 1/2 per real part.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl Estimate {
    /// Distance from `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }

    pub fn within_sigmas(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_err
    }
}

/// Running mean and centred second moment (Welford / Chan).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Estimate { mean: self.mean, std_err: (var / self.n as f64).sqrt(), samples: self.n }
    }
}

const CHUNK: u64 = 1024;

/// Estimates the means of `width` statistics over `samples` independent draws.
///
/// `stat(stream, out)` fills `out` (length `width`) for one sample; sample
/// `i` receives `RandomStream::new(seed, i)`. Samples are processed in
/// fixed-size chunks whose partial results are merged in index order, so the
/// output is bit-identical for any thread count.
pub fn monte_carlo<F>(samples: u64, seed: u64, width: usize, stat: F) -> Vec<Estimate>
where
    F: Fn(&mut RandomStream, &mut [f64]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<Vec<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Moments::default(); width];
            let mut out = vec![0.0; width];
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut stream = RandomStream::new(seed, i);
                stat(&mut stream, &mut out);
                for (a, &x) in acc.iter_mut().zip(&out) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Moments::default(); width];
    for chunk in partial {
        for (t, m) in total.iter_mut().zip(chunk) {
            *t = t.merge(m);
        }
    }
    total.iter().map(Moments::estimate).collect()
}

/// Collects one value per sample, in sample order.
pub fn collect_samples<T, F>(samples: u64, seed: u64, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomStream) -> T + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|i| draw(&mut RandomStream::new(seed, i)))
        .collect()
}
