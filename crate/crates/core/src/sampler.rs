//! Random streams, discrete sampling, Chernoff sample counts and streaming statistics.

use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::C64;

/// ChaCha8 stream keyed by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn bits(&mut self) -> u64 {
        self.rng.random::<u64>()
    }
}

/// `⌈4·ln(4/δ)·b²/ε²⌉`, at least 1.
///
/// Any `δ ∈ (0, 4)` keeps the logarithm positive; the guarantee is only meaningful below 1.
pub fn sample_count(epsilon: f64, delta: f64, b: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    if !(delta > 0.0 && delta < 4.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 4)")));
    }
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("b = {b} must be finite and nonnegative")));
    }
    let raw = 4.0 * (4.0 / delta).ln() * b * b / (epsilon * epsilon);
    // Absorb the last-bit rounding of ln/div so exact integers do not round up.
    let k = (raw * (1.0 - 1e-12)).ceil();
    if k > u64::MAX as f64 {
        return Err(Error::InvalidParameter(format!("sample count {raw:e} overflows")));
    }
    Ok((k as u64).max(1))
}

/// Draws `i` with probability `weights[i] / Σ weights` by cumulative inversion.
pub fn sample_discrete(weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::InvalidParameter(format!("weights must be nonnegative with positive finite sum, got {total}")));
    }
    let target = rng.uniform() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if target < acc {
                return Ok(i);
            }
        }
    }
    Ok(last)
}

pub fn coin(prob_heads: f64, rng: &mut RngStream) -> bool {
    rng.uniform() < prob_heads
}

/// Draws `l` with probability `bˡ/(l!·eᵇ)` by sequential conditional coins.
pub fn sample_poisson_like_tail(b: f64, rng: &mut RngStream) -> usize {
    let mut weight = (-b).exp();
    let mut remaining = 1.0;
    let mut l = 0;
    loop {
        if remaining <= weight || coin(weight / remaining, rng) {
            return l;
        }
        remaining -= weight;
        l += 1;
        weight *= b / l as f64;
    }
}

/// Precomputed cumulative weights for repeated inversion sampling.
#[derive(Debug, Clone, Default)]
pub struct CumulativeTable {
    cumulative: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    /// Returns `None` when the total mass is zero.
    pub fn sample(&self, rng: &mut RngStream) -> Option<usize> {
        let total = self.total();
        if !(total > 0.0) {
            return None;
        }
        let target = rng.uniform() * total;
        let i = self.cumulative.partition_point(|&c| c <= target);
        if i < self.cumulative.len() {
            return Some(i);
        }
        // Rounding pushed the target onto the total: take the last positive weight.
        let mut j = self.cumulative.len() - 1;
        while j > 0 && self.cumulative[j - 1] >= self.cumulative[j] {
            j -= 1;
        }
        Some(j)
    }
}

/// Welford accumulator for complex samples; merges follow Chan et al.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: C64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: C64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        let delta2 = x - self.mean;
        self.m2 += delta.re * delta2.re + delta.im * delta2.im;
    }

    pub fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / n;
        self.mean += delta * w;
        self.m2 += other.m2 + delta.norm_sqr() * self.count as f64 * w;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> C64 {
        self.mean
    }

    /// Sample standard deviation, `√(Σ|x_i − x̄|²/(n−1))`.
    pub fn std(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2.max(0.0) / (self.count - 1) as f64).sqrt()
        }
    }
}

pub fn streaming_mean(values: impl IntoIterator<Item = C64>) -> (C64, f64) {
    let mut acc = Accumulator::default();
    for v in values {
        acc.push(v);
    }
    (acc.mean(), acc.std())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate: C64,
    pub sample_count: u64,
    pub empirical_std: f64,
    pub b: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub workers: usize,
    pub elapsed: Duration,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chernoff_counts() {
        assert_eq!(sample_count(0.05, 0.01, 1.0).unwrap(), 9587);
        assert_eq!(sample_count(0.3, 0.2, 0.0).unwrap(), 1);
        assert_eq!(sample_count(1.0, 4.0 / std::f64::consts::E, 1.0).unwrap(), 4);
        assert!(sample_count(0.0, 0.1, 1.0).is_err());
        assert!(sample_count(0.1, 4.0, 1.0).is_err());
        assert!(sample_count(0.1, -0.5, 1.0).is_err());
        assert!(sample_count(0.1, 0.5, -1.0).is_err());
    }

    #[test]
    fn discrete_degenerate_and_invalid() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..1000 {
            assert_eq!(sample_discrete(&[1.0, 0.0, 0.0], &mut rng).unwrap(), 0);
        }
        assert!(sample_discrete(&[0.0, 0.0], &mut rng).is_err());
        assert!(sample_discrete(&[f64::NAN, 1.0], &mut rng).is_err());
    }

    #[test]
    fn discrete_frequencies() {
        let mut rng = RngStream::new(2, 0);
        let draws = 1_000_000;
        let mut half = 0;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            if sample_discrete(&[1.0, 1.0], &mut rng).unwrap() == 0 {
                half += 1;
            }
            counts[sample_discrete(&[1.0, 2.0, 3.0], &mut rng).unwrap()] += 1;
        }
        assert!((half as f64 / draws as f64 - 0.5).abs() < 0.002);
        for (c, want) in counts.iter().zip([1.0 / 6.0, 1.0 / 3.0, 0.5]) {
            assert!((*c as f64 / draws as f64 - want).abs() < 0.003);
        }
    }

    #[test]
    fn coins() {
        let mut rng = RngStream::new(3, 0);
        let draws = 1_000_000;
        let heads = (0..draws).filter(|_| coin(0.5, &mut rng)).count();
        assert!((heads as f64 / draws as f64 - 0.5).abs() < 0.002);
        assert!((0..10_000).all(|_| coin(1.0, &mut rng)));
        assert!((0..10_000).all(|_| !coin(0.0, &mut rng)));
    }

    #[test]
    fn poisson_tail_moments() {
        let mut rng = RngStream::new(4, 0);
        let draws = 1_000_000;
        let zeros = (0..draws).filter(|_| sample_poisson_like_tail(1.0, &mut rng) == 0).count();
        assert!((zeros as f64 / draws as f64 - (-1.0f64).exp()).abs() < 0.002);
        let total: usize = (0..draws).map(|_| sample_poisson_like_tail(2.0, &mut rng)).sum();
        assert!((total as f64 / draws as f64 - 2.0).abs() < 0.01);
        assert!((0..10_000).all(|_| sample_poisson_like_tail(1e-12, &mut rng) == 0));
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, id| {
            let mut r = RngStream::new(seed, id);
            (0..64).map(|_| r.bits()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
    }

    #[test]
    fn cumulative_table_skips_zero_weights() {
        let table = CumulativeTable::new([0.0, 2.0, 0.0, 1.0, 0.0]);
        let mut rng = RngStream::new(5, 0);
        let mut counts = [0usize; 5];
        for _ in 0..300_000 {
            counts[table.sample(&mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0] + counts[2] + counts[4], 0);
        assert!((counts[1] as f64 / 300_000.0 - 2.0 / 3.0).abs() < 0.004);
        assert!(CumulativeTable::new([0.0, 0.0]).sample(&mut rng).is_none());
    }

    #[test]
    fn streaming_statistics() {
        let (mean, std) = streaming_mean(std::iter::repeat(C64::new(0.3, -1.0)).take(100));
        assert!((mean - C64::new(0.3, -1.0)).norm() < 1e-15);
        assert!(std < 1e-12);

        let k = 1001;
        let (mean, _) = streaming_mean((0..k).map(|i| C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)));
        assert!(mean.norm() <= 2.0 / k as f64);

        let mut rng = RngStream::new(6, 0);
        let (mean, std) = streaming_mean((0..1_000_000).map(|_| C64::new(rng.uniform(), 0.0)));
        assert!((mean.re - 0.5).abs() < 0.003);
        assert!((std - (1.0f64 / 12.0).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn merge_matches_single_pass() {
        let mut rng = RngStream::new(9, 0);
        let xs: Vec<C64> = (0..1000).map(|_| C64::new(rng.uniform(), rng.uniform() - 0.5)).collect();
        let mut whole = Accumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut parts = Accumulator::default();
        for chunk in xs.chunks(137) {
            let mut a = Accumulator::default();
            chunk.iter().for_each(|&x| a.push(x));
            parts.merge(&a);
        }
        assert_eq!(parts.count(), whole.count());
        assert!((parts.mean() - whole.mean()).norm() < 1e-13);
        assert!((parts.std() - whole.std()).abs() < 1e-12);
    }
}
