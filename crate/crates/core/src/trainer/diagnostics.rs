//! Quantitative stand-ins for visual inspection of receptive fields:
//! how cleanly each neuron matches a single class template, and how much
//! structure survives on pixels that are background in the training data.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataio::ImageSet;
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapScore {
    /// Mean best-match cosine similarity, in `[0, 1]`.
    pub score: f64,
    /// Neurons skipped for having an all-zero receptive field.
    pub excluded: usize,
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    (na > 0.0 && nb > 0.0).then(|| (dot / (na.sqrt() * nb.sqrt())).clamp(0.0, 1.0))
}

/// Mean over neurons of the cosine similarity between each receptive field
/// and its best-matching template. Non-negative inputs keep the score in
/// `[0, 1]`; 1 means every field is a scaled copy of one template.
pub fn overlap_metric<'a>(
    fields: impl IntoIterator<Item = &'a [f64]>,
    templates: &[Vec<f64>],
) -> Result<OverlapScore> {
    let mut total = 0.0;
    let mut used = 0usize;
    let mut excluded = 0usize;
    for f in fields {
        if let Some(t) = templates.first() {
            if t.len() != f.len() {
                return Err(SimError::Dimension(format!(
                    "receptive field has {} entries, template {}",
                    f.len(),
                    t.len()
                )));
            }
        }
        let best = templates
            .iter()
            .filter_map(|t| cosine(f, t))
            .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))));
        match best {
            Some(b) => {
                total += b;
                used += 1;
            }
            None => excluded += 1,
        }
    }
    Ok(OverlapScore {
        score: if used > 0 { total / used as f64 } else { 0.0 },
        excluded,
    })
}

/// Overlap score against pixel-shuffled templates, averaged over `rounds`:
/// the level an unstructured field reaches by chance.
pub fn overlap_permutation_baseline<'a, R: Rng>(
    fields: &[&'a [f64]],
    templates: &[Vec<f64>],
    rounds: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut acc = 0.0;
    for _ in 0..rounds {
        let shuffled: Vec<Vec<f64>> = templates
            .iter()
            .map(|t| {
                let mut s = t.clone();
                s.shuffle(rng);
                s
            })
            .collect();
        acc += overlap_metric(fields.iter().copied(), &shuffled)?.score;
    }
    Ok(acc / rounds as f64)
}

/// Class templates present in `set`, in class order.
pub fn templates_of(set: &ImageSet) -> Vec<Vec<f64>> {
    set.class_templates().into_iter().flatten().collect()
}

/// Pixels whose intensity is at most `threshold` in at least `fraction` of
/// the images.
pub fn background_mask(set: &ImageSet, threshold: u8, fraction: f64) -> Vec<bool> {
    let n = crate::dataio::PIXELS;
    let mut dark = vec![0usize; n];
    for k in 0..set.len() {
        for (d, &p) in dark.iter_mut().zip(set.image(k)) {
            if p <= threshold {
                *d += 1;
            }
        }
    }
    let need = fraction * set.len() as f64;
    dark.into_iter().map(|d| set.len() > 0 && d as f64 >= need).collect()
}

/// Mean over neurons of the variance of their weights on masked pixels.
pub fn background_variance<'a>(fields: impl IntoIterator<Item = &'a [f64]>, mask: &[bool]) -> Result<f64> {
    let m = mask.iter().filter(|&&b| b).count();
    if m == 0 {
        return Err(SimError::Eval("background mask is empty".into()));
    }
    let mut total = 0.0;
    let mut rows = 0usize;
    for f in fields {
        if f.len() != mask.len() {
            return Err(SimError::Dimension(format!(
                "receptive field has {} entries, mask {}",
                f.len(),
                mask.len()
            )));
        }
        let vals = f.iter().zip(mask).filter(|(_, &b)| b).map(|(w, _)| *w);
        let mean = vals.clone().sum::<f64>() / m as f64;
        let var = vals.map(|w| (w - mean).powi(2)).sum::<f64>() / m as f64;
        total += var;
        rows += 1;
    }
    Ok(if rows > 0 { total / rows as f64 } else { 0.0 })
}

/// Mean pairwise cosine similarity and its minimum across rows.
pub fn pairwise_cosine<'a>(fields: &[&'a [f64]]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut min = 1.0f64;
    let mut n = 0usize;
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            let c = cosine(fields[a], fields[b]).unwrap_or(0.0);
            sum += c;
            min = min.min(c);
            n += 1;
        }
    }
    (if n > 0 { sum / n as f64 } else { 1.0 }, min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForgettingDiagnostics {
    /// Overlap score per snapshot.
    pub overlap: Vec<f64>,
    /// Accuracy per class seen so far, per snapshot.
    pub retention: Vec<[Option<f64>; 10]>,
    pub background_variance: Option<f64>,
}
