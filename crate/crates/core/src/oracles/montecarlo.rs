//! Seeded, chunked Monte Carlo for the MRC output SNR.
//!
//! Chunk `c` draws from its own ChaCha8 stream seeded with
//! [`substream_seed`]`(seed, c)`. Chunks run in parallel and are reduced in
//! chunk order, so results depend only on `(seed, n_trials, n_chunks)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channel::{BranchSampler, Modulation};
use crate::specfun::{gaussian_q, CompensatedSum};
use crate::sumdist::SumChannel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub n_trials: usize,
    pub n_chunks: usize,
    /// Two-sided confidence level of reported intervals.
    pub confidence: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0x5EED,
            n_trials: 1_000_000,
            n_chunks: 64,
            confidence: 0.95,
        }
    }
}

impl SimConfig {
    pub fn new(seed: u64, n_trials: usize) -> Self {
        SimConfig {
            seed,
            n_trials,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidParameter {
                name: "n_trials",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.n_chunks == 0 {
            return Err(Error::InvalidParameter {
                name: "n_chunks",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidParameter {
                name: "confidence",
                value: self.confidence,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(())
    }

    fn chunk_len(&self, c: usize) -> usize {
        let base = self.n_trials / self.n_chunks;
        base + usize::from(c < self.n_trials % self.n_chunks)
    }
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of chunk `chunk`: `splitmix64(seed ⊕ splitmix64(chunk))`.
pub fn substream_seed(seed: u64, chunk: u64) -> u64 {
    splitmix64(seed ^ splitmix64(chunk))
}

fn draw_chunk(samplers: &[BranchSampler], seed: u64, chunk: usize, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, chunk as u64));
    (0..len)
        .map(|_| samplers.iter().map(|s| s.sample(&mut rng)).sum())
        .collect()
}

/// Sorted draws of `Σ γ_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SumSamples {
    sorted: Vec<f64>,
    mean: f64,
}

impl SumSamples {
    pub fn from_unsorted(mut v: Vec<f64>) -> Self {
        let mut acc = CompensatedSum::new();
        for &x in &v {
            acc.add(x);
        }
        let mean = acc.value() / v.len() as f64;
        v.sort_unstable_by(f64::total_cmp);
        SumSamples { sorted: v, mean }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Fraction of draws `≤ x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// Empirical quantile (lower order statistic).
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.sorted.len();
        let i = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted[i]
    }

    /// Density estimate on the bins delimited by `edges` (ascending).
    pub fn histogram(&self, edges: &[f64]) -> Vec<f64> {
        let n = self.sorted.len() as f64;
        edges
            .windows(2)
            .map(|w| {
                let lo = self.sorted.partition_point(|&s| s < w[0]);
                let hi = self.sorted.partition_point(|&s| s < w[1]);
                (hi - lo) as f64 / (n * (w[1] - w[0]))
            })
            .collect()
    }

    /// Mean with a normal-approximation confidence interval.
    pub fn mean_estimate(&self, confidence: f64) -> McEstimate {
        McEstimate::from_values(&self.sorted, confidence)
    }
}

/// Draws `n_trials` sums of one sample per branch, in generation order.
pub fn draw_sums(ch: &SumChannel, cfg: &SimConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let samplers: Vec<BranchSampler> = ch.branches().iter().map(|b| b.sampler()).collect();
    let chunks: Vec<Vec<f64>> = (0..cfg.n_chunks)
        .into_par_iter()
        .map(|c| draw_chunk(&samplers, cfg.seed, c, cfg.chunk_len(c)))
        .collect();
    Ok(chunks.concat())
}

/// Draws `n_trials` sums of one sample per branch.
pub fn simulate_sum(ch: &SumChannel, cfg: &SimConfig) -> Result<SumSamples> {
    Ok(SumSamples::from_unsorted(draw_sums(ch, cfg)?))
}

/// Sample mean with a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

impl McEstimate {
    fn from_moments(sum: f64, sum_sq: f64, n: usize, confidence: f64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        let std_err = (var / nf).sqrt();
        let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
        McEstimate {
            mean,
            std_err,
            ci_low: mean - z * std_err,
            ci_high: mean + z * std_err,
            n,
        }
    }

    /// Sample mean of `v` with a normal-approximation interval.
    pub fn from_values(v: &[f64], confidence: f64) -> Self {
        let mut s = CompensatedSum::new();
        let mut s2 = CompensatedSum::new();
        for &x in v {
            s.add(x);
            s2.add(x * x);
        }
        Self::from_moments(s.value(), s2.value(), v.len(), confidence)
    }

    /// Fraction `hits / n` with a Wilson score interval, which stays
    /// informative when `hits` is 0 or `n`.
    pub fn proportion(hits: usize, n: usize, confidence: f64) -> Self {
        let nf = n as f64;
        let p = hits as f64 / nf;
        let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
        let z2 = z * z;
        let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
        let half = z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
        McEstimate {
            mean: p,
            std_err: (p * (1.0 - p) / nf).sqrt(),
            ci_low: (centre - half).max(0.0),
            ci_high: (centre + half).min(1.0),
            n,
        }
    }

    /// True when `x` lies within `k` standard errors of the mean.
    pub fn within_sigmas(&self, x: f64, k: f64) -> bool {
        (x - self.mean).abs() <= k * self.std_err
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.ci_low && x <= self.ci_high
    }
}

/// Average BER by averaging the conditional error probability
/// `Q(√(2λγ))` over simulated sums.
///
/// Averaging the conditional probability instead of counting simulated bit
/// errors has the same expectation with lower variance.
pub fn simulate_ber(
    ch: &SumChannel,
    modulation: &Modulation,
    cfg: &SimConfig,
) -> Result<McEstimate> {
    cfg.validate()?;
    let samplers: Vec<BranchSampler> = ch.branches().iter().map(|b| b.sampler()).collect();
    let lambda = modulation.lambda;
    let parts: Vec<(f64, f64)> = (0..cfg.n_chunks)
        .into_par_iter()
        .map(|c| {
            let draws = draw_chunk(&samplers, cfg.seed, c, cfg.chunk_len(c));
            let mut s = CompensatedSum::new();
            let mut s2 = CompensatedSum::new();
            for g in draws {
                let q = gaussian_q((2.0 * lambda * g).sqrt());
                s.add(q);
                s2.add(q * q);
            }
            (s.value(), s2.value())
        })
        .collect();
    let mut s = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    for (a, b) in parts {
        s.add(a);
        s2.add(b);
    }
    Ok(McEstimate::from_moments(
        s.value(),
        s2.value(),
        cfg.n_trials,
        cfg.confidence,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::BranchParams;

    fn unit() -> SumChannel {
        SumChannel::new(vec![BranchParams::new(1.0, 1.0, 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn reproducible_to_the_bit() {
        let cfg = SimConfig {
            n_trials: 10_001,
            n_chunks: 7,
            ..SimConfig::default()
        };
        let a = simulate_sum(&unit(), &cfg).unwrap();
        let b = simulate_sum(&unit(), &cfg).unwrap();
        assert_eq!(a, b);
        let other = simulate_sum(&unit(), &SimConfig { seed: 99, ..cfg }).unwrap();
        assert_ne!(a, other);
        assert_eq!(a.len(), 10_001);
    }

    #[test]
    fn substreams_differ() {
        let s: Vec<u64> = (0..100).map(|c| substream_seed(1, c)).collect();
        let mut d = s.clone();
        d.sort_unstable();
        d.dedup();
        assert_eq!(d.len(), s.len());
    }

    #[test]
    fn ecdf_quantile_histogram() {
        let s = SumSamples::from_unsorted(vec![3.0, 1.0, 2.0, 4.0]);
        assert_eq!(s.ecdf(2.0), 0.5);
        assert_eq!(s.ecdf(0.5), 0.0);
        assert_eq!(s.quantile(0.5), 2.0);
        assert_eq!(s.quantile(1.0), 4.0);
        let h = s.histogram(&[0.0, 2.5, 5.0]);
        assert_eq!(h, vec![0.2, 0.2]);
        assert_eq!(s.mean(), 2.5);
    }

    #[test]
    fn unit_case_ecdf_matches_closed_form() {
        let s = simulate_sum(&unit(), &SimConfig::new(3, 200_000)).unwrap();
        // F(γ) = γ/(1+γ)
        for &g in &[0.2, 1.0, 5.0] {
            assert!((s.ecdf(g) - g / (1.0 + g)).abs() < 5e-3);
        }
    }

    #[test]
    fn wilson_interval() {
        let e = McEstimate::proportion(0, 1000, 0.95);
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.ci_low, 0.0);
        assert!(e.ci_high > 0.003 && e.ci_high < 0.004);
        let e = McEstimate::proportion(500, 1000, 0.95);
        assert!((e.ci_high - 0.5 - 0.0309).abs() < 1e-3);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig {
            n_trials: 0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
        assert!(SimConfig {
            confidence: 1.0,
            ..SimConfig::default()
        }
        .validate()
        .is_err());
    }
}
