//! Small mergeable summaries used by the simulation engine.

use rand::RngExt;
use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

use crate::error::{invalid, Result};

/// Binomial proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub se: f64,
    pub successes: u64,
    pub trials: u64,
}

impl RateEstimate {
    pub fn binomial(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("rate with zero trials"));
        }
        if successes > trials {
            return Err(invalid(format!(
                "{successes} successes out of {trials} trials"
            )));
        }
        let p = successes as f64 / trials as f64;
        Ok(Self {
            rate: p,
            se: (p * (1.0 - p) / trials as f64).sqrt(),
            successes,
            trials,
        })
    }
}

/// Power sums of a sample, mergeable by addition.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    s1: f64,
    s2: f64,
    s3: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.s1 += x;
        let x2 = x * x;
        self.s2 += x2;
        self.s3 += x2 * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
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

    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }

    /// Moment skewness `m3 / m2^(3/2)` with population central moments.
    pub fn skewness(&self) -> f64 {
        let n = self.n as f64;
        let m = self.mean();
        let m2 = self.s2 / n - m * m;
        let m3 = self.s3 / n - 3.0 * m * self.s2 / n + 2.0 * m * m * m;
        m3 / m2.powf(1.5)
    }
}

pub fn sample_skewness(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut m2, mut m3) = (0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    (m3 / n) / (m2 / n).powf(1.5)
}

/// Fixed-width histogram; out-of-range values land in under/overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    /// Bin width 0.1 over `[-6, 6]`.
    pub fn standard() -> Self {
        Self::new(-6.0, 0.1, 120)
    }

    pub fn new(lo: f64, width: f64, bins: usize) -> Self {
        Self {
            lo,
            width,
            counts: vec![0; bins],
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        let pos = ((x - self.lo) / self.width).floor();
        if pos < 0.0 {
            self.underflow += 1;
        } else if pos >= self.counts.len() as f64 {
            self.overflow += 1;
        } else {
            self.counts[pos as usize] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    pub fn midpoint(&self, bin: usize) -> f64 {
        self.lo + self.width * (bin as f64 + 0.5)
    }

    /// Counts normalized so the in-range bins integrate to the in-range share.
    pub fn densities(&self) -> Vec<f64> {
        let total = self.total();
        if total == 0 {
            return vec![0.0; self.counts.len()];
        }
        let scale = 1.0 / (total as f64 * self.width);
        self.counts.iter().map(|&c| c as f64 * scale).collect()
    }
}

/// Percentile bootstrap interval for `statistic` over `samples`.
pub fn bootstrap_ci<F: Fn(&[f64]) -> f64>(
    samples: &[f64],
    statistic: F,
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(invalid("bootstrap needs at least two samples"));
    }
    if !(level > 0.0 && level < 1.0) || resamples == 0 {
        return Err(invalid(
            "bootstrap level must lie in (0, 1) with resamples > 0",
        ));
    }
    let mut rng = Pcg64Mcg::seed_from_u64(seed);
    let mut buf = vec![0.0; samples.len()];
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = samples[rng.random_range(0..samples.len())];
            }
            statistic(&buf)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    let idx = |q: f64| ((q * (resamples - 1) as f64).round() as usize).min(resamples - 1);
    Ok((stats[idx(tail)], stats[idx(1.0 - tail)]))
}
