//! Noisy-digit synthesis: additive white Gaussian noise at a per-image SNR,
//! optionally preceded by a contrast reduction about mid-gray.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ImageSet;
use crate::encoding::{domain, RngStream};
use crate::error::{Result, SimError};

/// Noise variance (normalized intensity units) used for blank images, whose
/// signal power is zero.
pub const DEFAULT_NOISE_FLOOR_VAR: f64 = 0.01;

const MID_GRAY: f64 = 127.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    Awgn,
    AwgnReducedContrast,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::None => "none",
            NoiseKind::Awgn => "awgn",
            NoiseKind::AwgnReducedContrast => "awgn_reduced_contrast",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(NoiseKind::None),
            "awgn" => Ok(NoiseKind::Awgn),
            "awgn_reduced_contrast" => Ok(NoiseKind::AwgnReducedContrast),
            o => Err(format!("unknown noise kind '{o}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub snr_db: f64,
    pub contrast_factor: f64,
    pub floor_var: f64,
}

impl NoiseSpec {
    pub fn awgn() -> Self {
        Self {
            kind: NoiseKind::Awgn,
            snr_db: 9.5,
            contrast_factor: 1.0,
            floor_var: DEFAULT_NOISE_FLOOR_VAR,
        }
    }

    pub fn awgn_reduced_contrast() -> Self {
        Self {
            kind: NoiseKind::AwgnReducedContrast,
            snr_db: 12.0,
            contrast_factor: 0.5,
            floor_var: DEFAULT_NOISE_FLOOR_VAR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.snr_db.is_finite() {
            return Err(SimError::Config("noise.snr_db must be finite".into()));
        }
        if !(self.contrast_factor > 0.0 && self.contrast_factor <= 1.0) {
            return Err(SimError::Config("noise.contrast must be in (0, 1]".into()));
        }
        if !(self.floor_var > 0.0) {
            return Err(SimError::Config("noise.floor_var must be > 0".into()));
        }
        Ok(())
    }

    pub fn apply<R: Rng>(&self, image: &[u8], rng: &mut R) -> Vec<u8> {
        match self.kind {
            NoiseKind::None => image.to_vec(),
            NoiseKind::Awgn => add_awgn(image, self.snr_db, self.floor_var, rng),
            NoiseKind::AwgnReducedContrast => {
                let reduced = reduce_contrast(image, self.contrast_factor);
                add_awgn(&reduced, self.snr_db, self.floor_var, rng)
            }
        }
    }
}

/// Noise standard deviation (normalized units) for a target SNR, with the
/// signal power taken as the mean squared normalized intensity of this image.
pub fn awgn_sigma(image: &[u8], snr_db: f64, floor_var: f64) -> f64 {
    let power = image
        .iter()
        .map(|&p| {
            let x = p as f64 / 255.0;
            x * x
        })
        .sum::<f64>()
        / image.len() as f64;
    let var = if power > 0.0 {
        power / 10f64.powf(snr_db / 10.0)
    } else {
        warn!("blank image: using noise floor variance {floor_var}");
        floor_var
    };
    var.sqrt()
}

pub fn add_awgn<R: Rng>(image: &[u8], snr_db: f64, floor_var: f64, rng: &mut R) -> Vec<u8> {
    let sigma = awgn_sigma(image, snr_db, floor_var);
    image
        .iter()
        .map(|&p| {
            let n: f64 = rng.sample(StandardNormal);
            let x = p as f64 / 255.0 + sigma * n;
            (x.clamp(0.0, 1.0) * 255.0).round() as u8
        })
        .collect()
}

/// Scales intensities about mid-gray: `127.5 + factor * (p - 127.5)`, rounded.
pub fn reduce_contrast(image: &[u8], factor: f64) -> Vec<u8> {
    image
        .iter()
        .map(|&p| (MID_GRAY + factor * (p as f64 - MID_GRAY)).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Applies `spec` to every image; image `k` draws from its own substream.
pub fn apply_noise(set: &ImageSet, spec: &NoiseSpec, seed: u64) -> ImageSet {
    let mut out = ImageSet::empty();
    for k in 0..set.len() {
        let mut rng = RngStream::substream(seed, domain::NOISE, k as u64);
        out.push(&spec.apply(set.image(k), rng.rng()), set.label(k));
    }
    out
}

pub fn write_noise_sidecar(path: &Path, spec: &NoiseSpec, seed: u64, source: &str, count: usize) -> Result<()> {
    let text = format!(
        "kind={}\nsnr_db={}\ncontrast_factor={}\nfloor_var={}\nseed={}\nsource={}\ncount={}\n",
        spec.kind, spec.snr_db, spec.contrast_factor, spec.floor_var, seed, source, count
    );
    fs::write(path, text).map_err(|e| SimError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digit() -> Vec<u8> {
        // A filled box standing in for a stroke: 12x6 block at 255, rest 0.
        let mut img = vec![0u8; 784];
        for r in 8..20 {
            for c in 11..17 {
                img[r * 28 + c] = 255;
            }
        }
        img
    }

    #[test]
    fn huge_snr_is_identity() {
        let img = digit();
        let mut rng = RngStream::new(3);
        assert_eq!(add_awgn(&img, 100.0, DEFAULT_NOISE_FLOOR_VAR, rng.rng()), img);
    }

    #[test]
    fn seeded_noise_is_deterministic() {
        let img = digit();
        let a = add_awgn(&img, 9.5, DEFAULT_NOISE_FLOOR_VAR, RngStream::new(7).rng());
        let b = add_awgn(&img, 9.5, DEFAULT_NOISE_FLOOR_VAR, RngStream::new(7).rng());
        assert_eq!(a, b);
    }

    #[test]
    fn noise_variance_matches_target() {
        let img = digit();
        let sigma = awgn_sigma(&img, 9.5, DEFAULT_NOISE_FLOOR_VAR);
        let power = (72.0 / 784.0) * 1.0;
        assert!((sigma * sigma - power / 10f64.powf(0.95)).abs() < 1e-15);

        // Variance estimator over the image: noise drawn as add_awgn draws it.
        let mut rng = RngStream::new(9);
        let noise: Vec<f64> = (0..784)
            .map(|_| sigma * rng.rng().sample::<f64, _>(StandardNormal))
            .collect();
        let mean = noise.iter().sum::<f64>() / 784.0;
        let var = noise.iter().map(|n| (n - mean).powi(2)).sum::<f64>() / 783.0;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.1, "{var}");

        let noisy = add_awgn(&img, 9.5, DEFAULT_NOISE_FLOOR_VAR, RngStream::new(9).rng());
        let bg_nonzero = (0..784).filter(|&k| img[k] == 0 && noisy[k] > 0).count();
        assert!(bg_nonzero > 200, "{bg_nonzero}");
    }

    #[test]
    fn blank_image_uses_floor() {
        let img = vec![0u8; 784];
        assert!((awgn_sigma(&img, 9.5, 0.04) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn contrast_examples() {
        let img: Vec<u8> = (0..=255).collect();
        assert_eq!(reduce_contrast(&img, 1.0), img);
        assert_eq!(reduce_contrast(&[255], 0.5), vec![191]);
        assert_eq!(reduce_contrast(&[0], 0.5), vec![64]);
    }

    #[test]
    fn contrast_halves_the_gap_before_noise() {
        let img = digit();
        let reduced = reduce_contrast(&img, 0.5);
        let gap = |im: &[u8]| im[8 * 28 + 11] as f64 - im[0] as f64;
        assert!((gap(&reduced) - gap(&img) / 2.0).abs() <= 1.0);

        // Mean digit/background gap after 12 dB noise stays near the halved gap.
        let noisy = NoiseSpec::awgn_reduced_contrast().apply(&img, RngStream::new(4).rng());
        let mean_of = |pred: &dyn Fn(usize) -> bool| {
            let v: Vec<f64> = (0..784).filter(|&k| pred(k)).map(|k| noisy[k] as f64).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let fg = mean_of(&|k| img[k] == 255);
        let bg = mean_of(&|k| img[k] == 0);
        assert!((fg - bg - gap(&img) / 2.0).abs() < 25.0, "fg {fg} bg {bg}");
    }

    #[test]
    fn images_get_independent_noise() {
        let img = digit();
        let set = ImageSet::new([img.clone(), img].concat(), vec![1, 1]);
        let noisy = apply_noise(&set, &NoiseSpec::awgn(), 5);
        assert_ne!(noisy.image(0), noisy.image(1));
        assert_eq!(noisy, apply_noise(&set, &NoiseSpec::awgn(), 5));
    }
}
