//! Plasticity-free passes: neuron labeling, classification and evaluation.
//!
//! Every image is presented to its own clone of the trained network with
//! homeostasis off, so the trained state is never mutated and images can be
//! processed in any order (or in parallel) with identical results.

use rayon::prelude::*;

use crate::dataio::ImageSet;
use crate::encoding::{RateImage, RngStream};
use crate::error::{Result, SimError};
use crate::sim::{run_presentation, Network, PresentationParams, PresentationResult};

/// How inference presentations are run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceParams {
    pub presentation: PresentationParams,
    pub rate_scale: f64,
    pub seed: u64,
}

/// Response of a frozen copy of `net` to one image.
pub fn respond(
    net: &Network,
    image: &[u8],
    params: &InferenceParams,
    domain: u64,
    index: u64,
) -> Result<PresentationResult> {
    let mut probe = net.clone();
    probe.set_homeostasis(false);
    let rates = RateImage::from_pixels(image, params.rate_scale);
    let mut rng = RngStream::substream(params.seed, domain, index);
    run_presentation(&mut probe, &rates, &params.presentation, rng.rng(), ())
}

fn respond_all(net: &Network, set: &ImageSet, params: &InferenceParams, domain: u64) -> Result<Vec<PresentationResult>> {
    (0..set.len())
        .into_par_iter()
        .map(|k| respond(net, set.image(k), params, domain, k as u64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub labels: Vec<Option<u8>>,
}

impl LabelMap {
    pub fn assigned(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Class with the most neurons; ties go to the lower class.
    pub fn most_populous(&self) -> Option<u8> {
        let mut counts = [0usize; 10];
        for l in self.labels.iter().flatten() {
            counts[*l as usize] += 1;
        }
        let best = (0..10).max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))?;
        (counts[best] > 0).then_some(best as u8)
    }
}

/// Argmax of per-class mean spike counts; `None` if every neuron was silent.
pub fn assign_labels(counts: &[[f64; 10]], presented: &[usize; 10]) -> LabelMap {
    let labels = counts
        .iter()
        .map(|row| {
            let mut best: Option<(u8, f64)> = None;
            for c in 0..10 {
                if presented[c] == 0 {
                    continue;
                }
                let mean = row[c] / presented[c] as f64;
                if mean > 0.0 && best.is_none_or(|(_, m)| mean > m) {
                    best = Some((c as u8, mean));
                }
            }
            best.map(|b| b.0)
        })
        .collect();
    LabelMap { labels }
}

pub fn label_neurons(net: &Network, labeled: &ImageSet, params: &InferenceParams) -> Result<LabelMap> {
    if labeled.is_empty() {
        return Err(SimError::Eval("labeling set is empty".into()));
    }
    let responses = respond_all(net, labeled, params, crate::encoding::domain::LABEL)?;
    let mut sums = vec![[0.0f64; 10]; net.n_exc()];
    let presented = labeled.class_counts();
    for (k, r) in responses.iter().enumerate() {
        let c = labeled.label(k) as usize;
        for (j, &n) in r.spike_counts.iter().enumerate() {
            sums[j][c] += n as f64;
        }
    }
    Ok(assign_labels(&sums, &presented))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub class: u8,
    /// No spikes even after retries; `class` is the most populous label.
    pub degenerate: bool,
}

/// Class whose labeled neurons have the highest mean spike count; ties go to
/// the lower class.
pub fn predict(spike_counts: &[u32], labels: &LabelMap) -> Result<Classification> {
    let fallback = labels
        .most_populous()
        .ok_or_else(|| SimError::Eval("no neuron carries a label".into()))?;
    let mut sums = [0.0f64; 10];
    let mut members = [0usize; 10];
    for (n, l) in spike_counts.iter().zip(&labels.labels) {
        if let Some(c) = l {
            sums[*c as usize] += *n as f64;
            members[*c as usize] += 1;
        }
    }
    if spike_counts.iter().all(|&n| n == 0) {
        return Ok(Classification {
            class: fallback,
            degenerate: true,
        });
    }
    let mut best = (fallback, f64::NEG_INFINITY);
    for c in 0..10 {
        if members[c] == 0 {
            continue;
        }
        let mean = sums[c] / members[c] as f64;
        if mean > best.1 {
            best = (c as u8, mean);
        }
    }
    Ok(Classification {
        class: best.0,
        degenerate: false,
    })
}

pub fn classify(
    net: &Network,
    image: &[u8],
    labels: &LabelMap,
    params: &InferenceParams,
    index: u64,
) -> Result<Classification> {
    let r = respond(net, image, params, crate::encoding::domain::TEST, index)?;
    predict(&r.spike_counts, labels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class_accuracy: [Option<f64>; 10],
    /// `confusion[true][predicted]`.
    pub confusion: [[u64; 10]; 10],
    pub evaluated: usize,
    pub degenerate: usize,
}

impl EvalReport {
    pub fn from_predictions(truth: &[u8], predictions: &[Classification]) -> Self {
        let mut confusion = [[0u64; 10]; 10];
        let mut degenerate = 0;
        for (&t, p) in truth.iter().zip(predictions) {
            confusion[t as usize][p.class as usize] += 1;
            degenerate += p.degenerate as usize;
        }
        let correct: u64 = (0..10).map(|c| confusion[c][c]).sum();
        let per_class_accuracy = std::array::from_fn(|c| {
            let total: u64 = confusion[c].iter().sum();
            (total > 0).then(|| confusion[c][c] as f64 / total as f64)
        });
        let n = truth.len();
        Self {
            accuracy: if n > 0 { correct as f64 / n as f64 } else { 0.0 },
            per_class_accuracy,
            confusion,
            evaluated: n,
            degenerate,
        }
    }

    /// `key=value` lines followed by the 10x10 confusion grid (rows = true class).
    pub fn to_text(&self, per_class: bool) -> String {
        let mut s = format!(
            "accuracy={}\nevaluated={}\ndegenerate={}\n",
            self.accuracy, self.evaluated, self.degenerate
        );
        if per_class {
            for (c, a) in self.per_class_accuracy.iter().enumerate() {
                if let Some(a) = a {
                    s.push_str(&format!("class.{c}.accuracy={a}\n"));
                }
            }
        }
        s.push_str("confusion=\n");
        for row in &self.confusion {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

pub fn evaluate(net: &Network, test: &ImageSet, labels: &LabelMap, params: &InferenceParams) -> Result<EvalReport> {
    let responses = respond_all(net, test, params, crate::encoding::domain::TEST)?;
    let predictions = responses
        .iter()
        .map(|r| predict(&r.spike_counts, labels))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_predictions(test.labels(), &predictions))
}
