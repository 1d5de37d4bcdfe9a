//! Seeded, schedule-independent Monte Carlo plumbing.
//!
//! Every trial owns a ChaCha8 stream selected by its index, so the draws a
//! trial sees depend only on `(seed, trial)`. Trials are grouped into fixed
//! chunks; chunks run in parallel and their accumulators are merged in chunk
//! order. Integer counters and floating sums therefore come out bit-identical
//! for any rayon pool size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Trials per chunk. Part of the reproducibility contract: changing it
/// changes the summation order of floating accumulators.
pub const CHUNK_TRIALS: u64 = 8192;

/// Generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// One standard normal draw (ziggurat).
#[inline]
pub fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Something that can absorb trials and be merged with a sibling.
pub trait Accumulator: Send {
    fn merge(&mut self, other: Self);
}

/// Runs `trials` independent trials. `fresh` builds an empty accumulator,
/// `trial` consumes one trial's generator.
pub fn run_trials<A, N, F>(trials: u64, seed: u64, fresh: N, trial: F) -> A
where
    A: Accumulator,
    N: Fn() -> A + Sync,
    F: Fn(&mut ChaCha8Rng, &mut A) + Sync,
{
    let chunks = trials.div_ceil(CHUNK_TRIALS);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = fresh();
            let start = c * CHUNK_TRIALS;
            let end = (start + CHUNK_TRIALS).min(trials);
            for t in start..end {
                let mut rng = trial_rng(seed, t);
                trial(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = fresh();
    for p in parts {
        total.merge(p);
    }
    total
}

/// Running power sums `Σx, Σx², Σx³, Σx⁴, Σ|x|³` of a scalar statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
    pub abs3: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        let x2 = x * x;
        self.n += 1;
        self.s1 += x;
        self.s2 += x2;
        self.s3 += x2 * x;
        self.s4 += x2 * x2;
        self.abs3 += x2 * x.abs();
    }

    pub fn mean(&self) -> f64 {
        self.s1 / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        (self.s2 - n * m * m) / (n - 1.0)
    }

    pub fn std_error_of_mean(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance, `√((μ₄ − σ⁴)/n)` with plug-in
    /// central moments.
    pub fn std_error_of_variance(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        let e2 = self.s2 / n;
        let e3 = self.s3 / n;
        let e4 = self.s4 / n;
        let mu4 = e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m.powi(4);
        let var = e2 - m * m;
        ((mu4 - var * var).max(0.0) / n).sqrt()
    }

    pub fn mean_abs_cubed(&self) -> f64 {
        self.abs3 / self.n as f64
    }
}

impl Accumulator for Moments {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s3 += o.s3;
        self.s4 += o.s4;
        self.abs3 += o.abs3;
    }
}

impl<A: Accumulator> Accumulator for Vec<A> {
    fn merge(&mut self, other: Self) {
        assert_eq!(self.len(), other.len(), "accumulator shapes differ");
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

impl Accumulator for u64 {
    fn merge(&mut self, other: Self) {
        *self += other;
    }
}
