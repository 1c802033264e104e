//! Poisson rate coding of pixel intensities.
//!
//! Each input fires independently per step with probability `rate * dt`,
//! the Bernoulli approximation of a Poisson process on a fixed clock.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::sim::SpikeSet;

/// Default intensity-to-rate factor: 255 maps to 63.75 Hz.
pub const DEFAULT_RATE_SCALE: f64 = 0.25;

pub fn intensity_to_rate(intensity: u8, scale: f64) -> f64 {
    intensity as f64 * scale
}

/// Firing rates (Hz) per input neuron plus a retry boost.
#[derive(Debug, Clone, PartialEq)]
pub struct RateImage {
    rates: Vec<f64>,
    /// Added to every input with a nonzero base rate.
    pub boost: f64,
}

impl RateImage {
    pub fn new(rates: Vec<f64>) -> Self {
        assert!(
            rates.iter().all(|r| r.is_finite() && *r >= 0.0),
            "rates must be finite and non-negative"
        );
        Self { rates, boost: 0.0 }
    }

    pub fn from_pixels(pixels: &[u8], scale: f64) -> Self {
        Self::new(pixels.iter().map(|&p| intensity_to_rate(p, scale)).collect())
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn base_rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn rate(&self, i: usize) -> f64 {
        let r = self.rates[i];
        if r > 0.0 {
            r + self.boost
        } else {
            0.0
        }
    }

    pub fn is_silent(&self) -> bool {
        self.rates.iter().all(|&r| r == 0.0)
    }
}

/// Seeded, splittable random stream.
///
/// Substreams are keyed by `(seed, domain, index)` so that, for example,
/// presentation `k` of a run draws the same spikes no matter which thread or
/// in which order it is simulated.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

pub mod domain {
    pub const INIT: u64 = 1;
    pub const TRAIN: u64 = 2;
    pub const LABEL: u64 = 3;
    pub const TEST: u64 = 4;
    pub const NOISE: u64 = 5;
    pub const SCHEDULE: u64 = 6;
    pub const MISC: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn substream(seed: u64, domain: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
        rng.set_stream(index);
        Self { seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Position within the stream, in 32-bit words.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Draws one step of spikes for every input.
pub fn sample_spikes<R: Rng>(rates: &RateImage, dt: f64, rng: &mut R, out: &mut SpikeSet) {
    out.reset(rates.len());
    for i in 0..rates.len() {
        let r = rates.rate(i);
        if r == 0.0 {
            continue;
        }
        if rng.random::<f64>() < r * dt / 1000.0 {
            out.push(i);
        }
    }
}

/// Per-presentation sampler that precomputes the active inputs and their
/// per-step firing probabilities.
#[derive(Debug, Clone)]
pub struct PoissonEncoder {
    active: Vec<(usize, f64)>,
    len: usize,
}

impl PoissonEncoder {
    pub fn new(rates: &RateImage, dt: f64) -> Self {
        let mut warned = false;
        let active = (0..rates.len())
            .filter_map(|i| {
                let r = rates.rate(i);
                (r > 0.0).then(|| {
                    let p = r * dt / 1000.0;
                    if p >= 1.0 && !warned {
                        warn!("rate {r} Hz saturates the per-step spike probability at dt={dt} ms");
                        warned = true;
                    }
                    (i, p)
                })
            })
            .collect();
        Self {
            active,
            len: rates.len(),
        }
    }

    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R, out: &mut SpikeSet) {
        out.reset(self.len);
        for &(i, p) in &self.active {
            if rng.random::<f64>() < p {
                out.push(i);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        assert_eq!(intensity_to_rate(0, 0.25), 0.0);
        assert_eq!(intensity_to_rate(128, 0.25), 32.0);
        assert_eq!(intensity_to_rate(255, DEFAULT_RATE_SCALE), 63.75);
        for i in 0..255u8 {
            assert!(intensity_to_rate(i + 1, 0.25) >= intensity_to_rate(i, 0.25));
        }
    }

    #[test]
    fn zero_rate_never_fires() {
        let img = RateImage::new(vec![0.0; 4]);
        let mut rng = RngStream::new(1);
        let mut s = SpikeSet::new(4);
        for _ in 0..10_000 {
            sample_spikes(&img, 0.5, rng.rng(), &mut s);
            assert!(s.is_empty());
        }
    }

    #[test]
    fn mean_count_within_three_sigma() {
        // 63.75 Hz for 700 steps of 0.5 ms: Binomial(700, 0.031875), mean 22.3125.
        let (n, p) = (700.0, 63.75 * 0.5 / 1000.0);
        let mean = n * p;
        assert!((mean - 22.3125f64).abs() < 1e-12);
        let var = n * p * (1.0 - p);
        let img = RateImage::new(vec![63.75]);
        let enc = PoissonEncoder::new(&img, 0.5);
        let trials = 10_000;
        let mut total = 0usize;
        let mut s = SpikeSet::new(1);
        for t in 0..trials {
            let mut rng = RngStream::substream(11, domain::MISC, t);
            for _ in 0..700 {
                enc.sample(rng.rng(), &mut s);
                total += s.count();
            }
        }
        let emp = total as f64 / trials as f64;
        let se = (var / trials as f64).sqrt();
        assert!((emp - mean).abs() < 3.0 * se, "empirical {emp} vs {mean}");
    }

    #[test]
    fn same_seed_same_spikes() {
        let img = RateImage::from_pixels(&[255, 100, 0, 30], 0.25);
        let run = || {
            let mut rng = RngStream::substream(5, domain::TRAIN, 17);
            let mut s = SpikeSet::new(4);
            (0..500)
                .map(|_| {
                    sample_spikes(&img, 0.5, rng.rng(), &mut s);
                    s.clone()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn boost_applies_to_active_inputs_only() {
        let mut img = RateImage::from_pixels(&[0, 4], 0.25);
        img.boost = 32.0;
        assert_eq!(img.rate(0), 0.0);
        assert_eq!(img.rate(1), 33.0);
    }

    #[test]
    fn substreams_are_distinct() {
        let mut a = RngStream::substream(1, domain::TRAIN, 0);
        let mut b = RngStream::substream(1, domain::TRAIN, 1);
        let mut c = RngStream::substream(1, domain::TEST, 0);
        let xa: u64 = a.rng().random();
        let xb: u64 = b.rng().random();
        let xc: u64 = c.rng().random();
        assert!(xa != xb && xa != xc && xb != xc);
    }
}
