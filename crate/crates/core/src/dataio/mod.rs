//! Digit data: IDX ingestion, noisy-set synthesis, and presentation schedules.

mod idx;
mod noise;
mod schedule;

pub use idx::{
    encode_images, encode_labels, load_idx, parse_images, parse_labels, read_bytes, write_idx,
    IMAGE_MAGIC, LABEL_MAGIC,
};
pub use noise::{
    add_awgn, apply_noise, awgn_sigma, reduce_contrast, write_noise_sidecar, NoiseKind, NoiseSpec,
    DEFAULT_NOISE_FLOOR_VAR,
};
pub use schedule::{build_schedule, decreasing_counts, Schedule, ScheduleMode, ScheduleSpec};

pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;

/// 28x28 grayscale digits with their class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSet {
    pixels: Vec<u8>,
    labels: Vec<u8>,
}

impl ImageSet {
    pub fn new(pixels: Vec<u8>, labels: Vec<u8>) -> Self {
        assert_eq!(pixels.len(), labels.len() * PIXELS, "image/label count mismatch");
        assert!(labels.iter().all(|&l| l <= 9), "labels must be 0-9");
        Self { pixels, labels }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, k: usize) -> &[u8] {
        &self.pixels[k * PIXELS..(k + 1) * PIXELS]
    }

    pub fn label(&self, k: usize) -> u8 {
        self.labels[k]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn push(&mut self, image: &[u8], label: u8) {
        assert_eq!(image.len(), PIXELS);
        assert!(label <= 9);
        self.pixels.extend_from_slice(image);
        self.labels.push(label);
    }

    /// New set holding the given indices, in order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut out = Self::empty();
        for &k in indices {
            out.push(self.image(k), self.label(k));
        }
        out
    }

    pub fn filter_classes(&self, classes: &[u8]) -> Self {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&k| classes.contains(&self.label(k)))
            .collect();
        self.subset(&idx)
    }

    pub fn class_counts(&self) -> [usize; 10] {
        let mut c = [0; 10];
        for &l in &self.labels {
            c[l as usize] += 1;
        }
        c
    }

    /// Per-class mean image (pixel units), `None` for absent classes.
    pub fn class_templates(&self) -> Vec<Option<Vec<f64>>> {
        let mut sums = vec![vec![0.0; PIXELS]; 10];
        let counts = self.class_counts();
        for k in 0..self.len() {
            let s = &mut sums[self.label(k) as usize];
            for (acc, &p) in s.iter_mut().zip(self.image(k)) {
                *acc += p as f64;
            }
        }
        sums.into_iter()
            .zip(counts)
            .map(|(s, n)| (n > 0).then(|| s.into_iter().map(|v| v / n as f64).collect()))
            .collect()
    }
}
