//! Training runs over a schedule, plus labeling, inference, evaluation and
//! forgetting diagnostics.

mod diagnostics;
mod inference;
mod snapshot;

use std::time::Instant;

use log::{info, warn};

pub use diagnostics::{
    background_mask, background_variance, overlap_metric, overlap_permutation_baseline,
    pairwise_cosine, templates_of, ForgettingDiagnostics, OverlapScore,
};
pub use inference::{
    assign_labels, classify, evaluate, label_neurons, predict, respond, Classification,
    EvalReport, InferenceParams, LabelMap,
};
pub use snapshot::{Snapshot, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use crate::dataio::{ImageSet, Schedule};
use crate::encoding::{domain, RateImage, RngStream};
use crate::error::{Result, SimError};
use crate::plasticity::{Learner, PlasticityConfig};
use crate::sim::{run_presentation, Network, NetworkParams, PresentationParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub n_exc: usize,
    pub network: NetworkParams,
    pub plasticity: PlasticityConfig,
    pub presentation: PresentationParams,
    pub rate_scale: f64,
    pub seed: u64,
    /// Presentations between snapshots; the final state is always captured.
    pub snapshot_every: usize,
    /// Initial weights are uniform in `[0, init_frac * w_max]`.
    pub init_frac: f64,
    pub record_wallclock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_exc: 100,
            network: NetworkParams::default(),
            plasticity: PlasticityConfig::default(),
            presentation: PresentationParams::default(),
            rate_scale: crate::encoding::DEFAULT_RATE_SCALE,
            seed: 1,
            snapshot_every: 1000,
            init_frac: 0.3,
            record_wallclock: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_exc == 0 {
            return Err(SimError::Config("n_exc must be >= 1".into()));
        }
        if self.snapshot_every == 0 {
            return Err(SimError::Config("snapshot cadence must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.init_frac) {
            return Err(SimError::Config("init_frac must be in [0, 1]".into()));
        }
        if (self.network.w_max - self.plasticity.w_max).abs() > 0.0 {
            return Err(SimError::Config("network and plasticity w_max differ".into()));
        }
        self.network.validate()?;
        self.plasticity.validate()
    }

    pub fn inference(&self) -> InferenceParams {
        InferenceParams {
            presentation: self.presentation,
            rate_scale: self.rate_scale,
            seed: self.seed,
        }
    }

    pub fn initial_network(&self, n_input: usize) -> Result<Network> {
        let mut rng = RngStream::substream(self.seed, domain::INIT, 0);
        Network::with_random_weights(self.network, n_input, self.n_exc, self.init_frac, rng.rng())
    }
}

/// One row of the run log.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub presentation_index: usize,
    pub class: u8,
    pub exc_spike_total: u32,
    pub retries: u32,
    pub mean_theta: f64,
    pub mean_weight: f64,
    pub wallclock_ms: Option<f64>,
}

pub const LOG_HEADER: &str =
    "presentation_index,class,exc_spike_total,retries,mean_theta,mean_weight,wallclock_ms";

impl LogRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.presentation_index,
            self.class,
            self.exc_spike_total,
            self.retries,
            self.mean_theta,
            self.mean_weight,
            self.wallclock_ms.map(|w| format!("{w:.3}")).unwrap_or_default()
        )
    }
}

pub fn log_to_csv(rows: &[LogRow]) -> String {
    let mut s = String::from(LOG_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

#[derive(Debug)]
pub struct TrainOutput {
    pub network: Network,
    pub log: Vec<LogRow>,
    pub snapshots: Vec<Snapshot>,
    pub degenerate_presentations: usize,
    /// Set when the run stopped on a numerical fault; `snapshots` still holds
    /// everything captured before it.
    pub fault: Option<SimError>,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Trains a freshly initialised network on `schedule`.
pub fn train(cfg: &TrainConfig, data: &ImageSet, schedule: &Schedule) -> Result<TrainOutput> {
    cfg.validate()?;
    let net = cfg.initial_network(crate::dataio::PIXELS)?;
    train_network(cfg, net, data, schedule)
}

/// Continues training an existing network.
pub fn train_network(cfg: &TrainConfig, mut net: Network, data: &ImageSet, schedule: &Schedule) -> Result<TrainOutput> {
    cfg.validate()?;
    if let Some(&(k, _)) = schedule.entries.iter().find(|(k, _)| *k >= data.len()) {
        return Err(SimError::Config(format!("schedule references image {k} of {}", data.len())));
    }
    let mut learner = Learner::new(cfg.plasticity, net.n_input(), net.n_exc(), net.dt());
    let mut log = Vec::with_capacity(schedule.len());
    let mut snapshots = Vec::new();
    let mut degenerate = 0;
    let started = Instant::now();

    for (p, &(k, class)) in schedule.entries.iter().enumerate() {
        let rates = RateImage::from_pixels(data.image(k), cfg.rate_scale);
        let mut rng = RngStream::substream(cfg.seed, domain::TRAIN, p as u64);
        let result = match run_presentation(&mut net, &rates, &cfg.presentation, rng.rng(), &mut learner) {
            Ok(r) => r,
            Err(e @ SimError::Numerical { .. }) => {
                warn!("numerical fault at presentation {p}: {e}");
                return Ok(TrainOutput {
                    network: net,
                    log,
                    snapshots,
                    degenerate_presentations: degenerate,
                    fault: Some(e),
                });
            }
            Err(e) => return Err(e),
        };
        if result.degenerate {
            degenerate += 1;
            warn!("presentation {p} (image {k}, class {class}) stayed silent after {} retries", result.retries);
        }
        log.push(LogRow {
            presentation_index: p,
            class,
            exc_spike_total: result.total_spikes(),
            retries: result.retries,
            mean_theta: mean(net.exc.iter().map(|n| n.theta)),
            mean_weight: net.weights.mean(),
            wallclock_ms: cfg
                .record_wallclock
                .then(|| started.elapsed().as_secs_f64() * 1e3),
        });
        let done = p + 1;
        if done % cfg.snapshot_every == 0 || done == schedule.len() {
            snapshots.push(Snapshot::capture(&net, done as u64, cfg.seed));
        }
        if done % 500 == 0 {
            info!("{done}/{} presentations", schedule.len());
        }
    }
    Ok(TrainOutput {
        network: net,
        log,
        snapshots,
        degenerate_presentations: degenerate,
        fault: None,
    })
}
